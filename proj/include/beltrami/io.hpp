#pragma once

#include <string>

#include "beltrami/coefficients.hpp"
#include "beltrami/grid.hpp"

namespace beltrami {

// Field CSV: header "x,y,re,im", one node per line in storage order, 17
// significant digits. A JSON sidecar (same path with extension replaced by
// .meta.json) records center, halfwidth, resolution and the meaning tag.
void write_field_csv(const ComplexField& field, const std::string& path);
ComplexField read_field_csv(const std::string& path);

// Coefficient CSV: header "x,y,re_mu,im_mu,re_nu,im_nu", same layout and
// sidecar convention.
void write_coefficient_csv(const CoefficientField& coeff, const std::string& path);
CoefficientField read_coefficient_csv(const std::string& path);

std::string meta_path_for(const std::string& csv_path);

// Rounds to 12 significant digits; report JSON goes through this so identical
// runs serialize byte-identically.
double json_round(double v);

}  // namespace beltrami
