// json_io.hpp: JSON encodings for matrices, families, blocked states, ensembles and reports

#pragma once

#include "qfi/ensemble.hpp"
#include "qfi/hermitian.hpp"
#include "qfi/matrix_repr.hpp"
#include "qfi/qfi_engine.hpp"
#include "qfi/state_family.hpp"

#include <json.hpp>

#include <string>
#include <variant>

namespace qfi::io {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Parses a file; ParseError carries the path and line/column.
Json read_json_file(const std::string& path);
Json parse_json_text(const std::string& text, const std::string& source = "<input>");

/// {"dim": N, "entries": [[[re, im] | re, ...], ...]} row-major. "dim" is
/// optional; when present the entries must be N x N. `where` names the
/// field in error messages.
Matrix parse_matrix(const Json& j, const std::string& where, bool require_square = true);

/// [[re, im] | re, ...].
Vector parse_vector(const Json& j, const std::string& where);

/// theta-free (rho, drho) input.
struct RhoDrhoPair {
    DensityMatrix rho;
    HermitianMatrix drho;
};

using Problem = std::variant<StateFamily, RhoDrhoPair, BlockedState>;

/// Dispatches on the document shape:
///   {"blocks": [...], "cross_generators": [...]}            blocked state
///   {"kind": "unitary", "rho0", "generator"}                 unitary family
///   {"kind": "sampled_grid", "thetas", "matrices"}           grid family
///   {"kind": "spectral", "thetas", "eigenvalues", "eigenvectors"}
///   {"kind": "affine", "rho_const", "rho_linear"}            rho = A + theta B
///   {"rho", "drho"}                                          pair
///   {"rho", "generator"}                                     unitary at theta = 0
/// Families take an optional "domain": [lo, hi].
Problem parse_problem(const Json& j);

BlockedState parse_blocked_state(const Json& j);
PureEnsemble parse_ensemble(const Json& j);

OrderedJson matrix_json(const Matrix& m);
OrderedJson vector_json(const Vector& v);
OrderedJson real_vector_json(const Eigen::VectorXd& v);
OrderedJson report_json(const QfiReport& report);
OrderedJson ensemble_json(const PureEnsemble& ensemble);

/// Pretty-printed with two-space indent. Doubles use 17 significant digits
/// (integral values keep a trailing ".0"); non-finite values become null.
std::string dump(const OrderedJson& j);

}  // namespace qfi::io
