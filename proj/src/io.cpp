#include "beltrami/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "beltrami/errors.hpp"

namespace beltrami {

using nlohmann::json;

std::string meta_path_for(const std::string& csv_path) {
  const auto dot = csv_path.find_last_of('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
    return csv_path + ".meta.json";
  }
  return csv_path.substr(0, dot) + ".meta.json";
}

double json_round(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

static void write_meta(const GridSpec& spec, Meaning meaning, const std::string& csv_path) {
  json meta;
  meta["center_re"] = spec.center.real();
  meta["center_im"] = spec.center.imag();
  meta["halfwidth"] = spec.halfwidth;
  meta["resolution"] = spec.resolution;
  meta["meaning"] = meaning_name(meaning);
  std::ofstream out(meta_path_for(csv_path));
  if (!out) throw io_error("cannot write " + meta_path_for(csv_path));
  out << meta.dump(2) << "\n";
  if (!out.good()) throw io_error("write failed: " + meta_path_for(csv_path));
}

struct MetaInfo {
  GridSpec spec;
  Meaning meaning;
};

static MetaInfo read_meta(const std::string& csv_path) {
  const std::string mp = meta_path_for(csv_path);
  std::ifstream in(mp);
  if (!in) throw io_error("cannot read " + mp);
  json meta;
  try {
    in >> meta;
  } catch (const std::exception& e) {
    throw io_error("bad metadata in " + mp + ": " + e.what());
  }
  MetaInfo info;
  try {
    info.spec = make_grid(cd(meta.at("center_re").get<double>(), meta.at("center_im").get<double>()),
                          meta.at("halfwidth").get<double>(), meta.at("resolution").get<int>());
    info.meaning = meaning_from_name(meta.at("meaning").get<std::string>());
  } catch (const io_error&) {
    throw;
  } catch (const std::exception& e) {
    throw io_error("bad metadata in " + mp + ": " + e.what());
  }
  return info;
}

static void write_rows(std::ofstream& out, const ComplexField* field,
                       const CoefficientField* coeff, const GridSpec& spec) {
  const int N = spec.resolution;
  char buf[256];
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const cd z = spec.node(i, j);
      if (field) {
        const cd v = field->at(i, j);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", z.real(), z.imag(), v.real(),
                      v.imag());
      } else {
        const cd m = coeff->mu.at(i, j);
        const cd n = coeff->nu.at(i, j);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", z.real(), z.imag(),
                      m.real(), m.imag(), n.real(), n.imag());
      }
      out << buf;
    }
  }
}

void write_field_csv(const ComplexField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << "x,y,re,im\n";
  write_rows(out, &field, nullptr, field.spec);
  if (!out.good()) throw io_error("write failed: " + path);
  write_meta(field.spec, field.meaning, path);
}

void write_coefficient_csv(const CoefficientField& coeff, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  out << "x,y,re_mu,im_mu,re_nu,im_nu\n";
  write_rows(out, nullptr, &coeff, coeff.mu.spec);
  if (!out.good()) throw io_error("write failed: " + path);
  write_meta(coeff.mu.spec, Meaning::coefficient, path);
}

// Splits a CSV line into exactly `want` doubles; throws parse_error with the
// 1-based line number otherwise.
static void parse_numbers(const std::string& line, int lineno, double* out, int want) {
  std::stringstream ss(line);
  std::string cell;
  int got = 0;
  while (std::getline(ss, cell, ',')) {
    if (got >= want) throw parse_error(lineno, "too many columns");
    char* end = nullptr;
    out[got] = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) throw parse_error(lineno, "not a number: '" + cell + "'");
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    if (*end != '\0') throw parse_error(lineno, "trailing junk: '" + cell + "'");
    ++got;
  }
  if (got != want) throw parse_error(lineno, "expected " + std::to_string(want) + " columns");
}

template <typename Store>
static void read_csv_body(const std::string& path, const GridSpec& spec, int columns,
                          const char* header, Store&& store) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot read " + path);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw parse_error(1, "empty file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw parse_error(1, std::string("expected header '") + header + "'");
  const int N = spec.resolution;
  const double h = spec.spacing();
  double cols[6];
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (!std::getline(in, line)) throw parse_error(lineno + 1, "unexpected end of file");
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      parse_numbers(line, lineno, cols, columns);
      const cd z = spec.node(i, j);
      if (std::abs(cols[0] - z.real()) > 1e-9 * std::max(1.0, spec.halfwidth) ||
          std::abs(cols[1] - z.imag()) > 1e-9 * std::max(1.0, spec.halfwidth)) {
        throw parse_error(lineno, "node coordinates disagree with grid metadata");
      }
      store(i, j, cols);
      (void)h;
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) throw parse_error(lineno, "trailing data after the last node");
  }
}

ComplexField read_field_csv(const std::string& path) {
  const MetaInfo info = read_meta(path);
  ComplexField field = make_field(info.spec, info.meaning);
  read_csv_body(path, info.spec, 4, "x,y,re,im",
                [&](int i, int j, const double* c) { field.at(i, j) = cd(c[2], c[3]); });
  return field;
}

CoefficientField read_coefficient_csv(const std::string& path) {
  const MetaInfo info = read_meta(path);
  ComplexField mu = make_field(info.spec, Meaning::coefficient);
  ComplexField nu = make_field(info.spec, Meaning::coefficient);
  read_csv_body(path, info.spec, 6, "x,y,re_mu,im_mu,re_nu,im_nu", [&](int i, int j, const double* c) {
    mu.at(i, j) = cd(c[2], c[3]);
    nu.at(i, j) = cd(c[4], c[5]);
  });
  return make_coefficient(std::move(mu), std::move(nu));
}

}  // namespace beltrami
