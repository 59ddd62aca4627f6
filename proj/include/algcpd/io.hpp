#pragma once

// File formats: the CPD3 binary tensor container, factor matrices as JSON and
// JSON views of results and certificates.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "algcpd/conditions.hpp"
#include "algcpd/cpd_algebraic.hpp"
#include "algcpd/structured_maps.hpp"
#include "algcpd/tensor.hpp"

namespace algcpd::io {

/// "CPD3", version 1, u32 LE dims, then I*J*K binary64 LE values, k fastest.
/// Throws InvalidArgument on a bad magic/version, a length mismatch in either
/// direction, or non-finite values.
Tensor3d read_cpd3(std::istream& in);
Tensor3d read_cpd3_file(const std::string& path);
void write_cpd3(std::ostream& out, const Tensor3d& t);
void write_cpd3_file(const std::string& path, const Tensor3d& t);

/// Q = r^T r of a Gram factor as a D x D x 1 CPD3 tensor.
void write_gram_file(const std::string& path, const GramOperator& g);

/// {"rows": n, "cols": r, "data": [row-major]}.
nlohmann::json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const nlohmann::json& j);

/// {"A": ..., "B": ..., "C": ...}.
nlohmann::json factors_to_json(const FactorTripled& f);
FactorTripled factors_from_json(const nlohmann::json& j);
FactorTripled read_factors_file(const std::string& path);

nlohmann::json result_to_json(const CpdResult& r);
nlohmann::json report_to_json(const UniquenessReport& r);
nlohmann::json bounds_to_json(const std::vector<GenericBound>& b);

}  // namespace algcpd::io
