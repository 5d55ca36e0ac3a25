#include "qfi/json_io.hpp"

#include "qfi/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace qfi::io {

namespace {

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::ParseError, where + ": " + what);
}

// Re-tags a validation error with the JSON field it came from.
template <class F>
auto with_context(const std::string& where, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        std::string msg = e.what();
        const std::string prefix = std::string(to_string(e.kind())) + ": ";
        if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
        throw Error(e.kind(), where + ": " + msg);
    }
}

const Json& field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) parse_fail(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) parse_fail(where, std::string("missing field \"") + key + "\"");
    return *it;
}

std::string sub(const std::string& where, const char* key) {
    return where.empty() ? std::string(key) : where + "." + key;
}

std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

double number(const Json& j, const std::string& where) {
    if (!j.is_number()) parse_fail(where, "expected a number");
    return j.get<double>();
}

cplx complex_entry(const Json& e, const std::string& where) {
    if (e.is_number()) return {e.get<double>(), 0.0};
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        return {e[0].get<double>(), e[1].get<double>()};
    }
    parse_fail(where, "expected a number or a [re, im] pair");
}

const Json& array_field(const Json& j, const char* key, const std::string& where) {
    const Json& a = field(j, key, where);
    if (!a.is_array()) parse_fail(sub(where, key), "expected an array");
    return a;
}

Domain parse_domain(const Json& j, const std::string& where) {
    Domain d;
    auto it = j.find("domain");
    if (it == j.end()) return d;
    const std::string w = sub(where, "domain");
    if (!it->is_array() || it->size() != 2) parse_fail(w, "expected [lo, hi]");
    d.lo = number((*it)[0], at(w, 0));
    d.hi = number((*it)[1], at(w, 1));
    if (!(d.lo <= d.hi)) parse_fail(w, "lo exceeds hi");
    return d;
}

std::vector<double> parse_thetas(const Json& j, const std::string& where) {
    const Json& a = array_field(j, "thetas", where);
    if (a.empty()) parse_fail(sub(where, "thetas"), "grid is empty");
    std::vector<double> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.push_back(number(a[i], at(sub(where, "thetas"), i)));
    return out;
}

std::size_t grid_index(const std::vector<double>& thetas, double theta) {
    const double tol = 1e-12 * std::max(1.0, std::abs(theta));
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        if (std::abs(thetas[i] - theta) <= tol) return i;
    }
    std::ostringstream os;
    os.precision(17);
    os << "theta = " << theta << " is not a grid point";
    throw Error(ErrorKind::EvaluationFailure, os.str());
}

Domain grid_domain(const std::vector<double>& thetas) {
    auto [lo, hi] = std::minmax_element(thetas.begin(), thetas.end());
    return Domain{*lo, *hi};
}

DensityMatrix density(const Json& j, const std::string& where) {
    const Matrix m = parse_matrix(j, where);
    return with_context(where, [&] { return DensityMatrix(HermitianMatrix(m)); });
}

HermitianMatrix hermitian(const Json& j, const std::string& where) {
    const Matrix m = parse_matrix(j, where);
    return with_context(where, [&] { return HermitianMatrix(m); });
}

StateFamily parse_family(const Json& j) {
    const Json& kind_j = field(j, "kind", "");
    if (!kind_j.is_string()) parse_fail("kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();
    const Domain domain = parse_domain(j, "");

    if (kind == "unitary") {
        const DensityMatrix rho0 = density(field(j, "rho0", ""), "rho0");
        const HermitianMatrix h = hermitian(field(j, "generator", ""), "generator");
        return with_context("generator", [&] { return StateFamily::unitary(h, rho0, domain); });
    }
    if (kind == "affine") {
        const HermitianMatrix a = hermitian(field(j, "rho_const", ""), "rho_const");
        const HermitianMatrix b = hermitian(field(j, "rho_linear", ""), "rho_linear");
        if (a.dim() != b.dim()) {
            throw Error(ErrorKind::DimensionMismatch, "rho_linear: dimension differs from rho_const");
        }
        return StateFamily::analytic(
            [a, b](double theta) {
                return DensityMatrix(HermitianMatrix(a.matrix() + theta * b.matrix()));
            },
            [b](double) { return b; }, domain);
    }
    if (kind == "sampled_grid") {
        const std::vector<double> thetas = parse_thetas(j, "");
        const Json& mats = array_field(j, "matrices", "");
        if (mats.size() != thetas.size()) {
            parse_fail("matrices", "expected " + std::to_string(thetas.size()) + " matrices, got " +
                                       std::to_string(mats.size()));
        }
        std::vector<DensityMatrix> states;
        for (std::size_t i = 0; i < mats.size(); ++i) states.push_back(density(mats[i], at("matrices", i)));
        for (const DensityMatrix& s : states) {
            if (s.dim() != states.front().dim()) {
                throw Error(ErrorKind::DimensionMismatch, "matrices: grid states differ in dimension");
            }
        }
        return StateFamily::sampled(
            [thetas, states](double theta) { return states[grid_index(thetas, theta)]; },
            j.contains("domain") ? domain : grid_domain(thetas));
    }
    if (kind == "spectral") {
        const std::vector<double> thetas = parse_thetas(j, "");
        const Json& vals = array_field(j, "eigenvalues", "");
        const Json& vecs = array_field(j, "eigenvectors", "");
        if (vals.size() != thetas.size() || vecs.size() != thetas.size()) {
            parse_fail("eigenvalues", "grid arrays must all have " + std::to_string(thetas.size()) +
                                          " entries");
        }
        std::vector<Eigen::VectorXd> ps;
        std::vector<Matrix> vs;
        for (std::size_t i = 0; i < thetas.size(); ++i) {
            const std::string w = at("eigenvalues", i);
            if (!vals[i].is_array()) parse_fail(w, "expected an array");
            Eigen::VectorXd p(vals[i].size());
            for (std::size_t k = 0; k < vals[i].size(); ++k) p(k) = number(vals[i][k], at(w, k));
            Matrix v = parse_matrix(vecs[i], at("eigenvectors", i), false);
            if (v.cols() != p.size()) {
                throw Error(ErrorKind::DimensionMismatch,
                            at("eigenvectors", i) + ": column count differs from eigenvalue count");
            }
            ps.push_back(std::move(p));
            vs.push_back(std::move(v));
        }
        return StateFamily::spectral(
            [thetas, ps](double theta) { return ps[grid_index(thetas, theta)]; },
            [thetas, vs](double theta) { return vs[grid_index(thetas, theta)]; }, {}, {},
            j.contains("domain") ? domain : grid_domain(thetas));
    }
    parse_fail("kind", "unknown family kind \"" + kind + "\"");
}

void dump_value(const OrderedJson& j, std::string& out, int depth) {
    const std::string pad(2 * (depth + 1), ' ');
    const std::string close(2 * depth, ' ');
    switch (j.type()) {
        case OrderedJson::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t k = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++k) {
                out += pad + OrderedJson(it.key()).dump() + ": ";
                dump_value(it.value(), out, depth + 1);
                out += k + 1 < j.size() ? ",\n" : "\n";
            }
            out += close + "}";
            return;
        }
        case OrderedJson::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Flat arrays of scalars stay on one line.
            bool flat = true;
            for (const auto& e : j) flat = flat && !e.is_structured();
            if (flat) {
                out += "[";
                for (std::size_t k = 0; k < j.size(); ++k) {
                    if (k) out += ", ";
                    dump_value(j[k], out, depth + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                out += pad;
                dump_value(j[k], out, depth + 1);
                out += k + 1 < j.size() ? ",\n" : "\n";
            }
            out += close + "]";
            return;
        }
        case OrderedJson::value_t::number_float: {
            const double x = j.get<double>();
            if (!std::isfinite(x)) {
                out += "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            std::string s(buf);
            if (s.find_first_of(".eE") == std::string::npos) s += ".0";
            out += s;
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::ParseError, source + ": " + e.what());
    }
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

Matrix parse_matrix(const Json& j, const std::string& where, bool require_square) {
    const Json* rows = &j;
    std::optional<std::size_t> dim;
    std::string w = where;
    if (j.is_object()) {
        if (auto it = j.find("dim"); it != j.end()) {
            if (!it->is_number_integer() || it->get<long long>() < 1) {
                parse_fail(sub(where, "dim"), "expected a positive integer");
            }
            dim = it->get<std::size_t>();
        }
        rows = &array_field(j, "entries", where);
        w = sub(where, "entries");
    } else if (!j.is_array()) {
        parse_fail(where, "expected a matrix object or an array of rows");
    }
    const std::size_t n = rows->size();
    if (n == 0) parse_fail(w, "matrix has no rows");
    if (dim && *dim != n) {
        parse_fail(w, "has " + std::to_string(n) + " rows but dim is " + std::to_string(*dim));
    }
    const Json& first = (*rows)[0];
    if (!first.is_array()) parse_fail(at(w, 0), "expected a row array");
    const std::size_t m = first.size();
    if (require_square && m != n) {
        parse_fail(at(w, 0), "has " + std::to_string(m) + " entries, expected " + std::to_string(n));
    }
    Matrix out(n, m);
    for (std::size_t r = 0; r < n; ++r) {
        const Json& row = (*rows)[r];
        if (!row.is_array() || row.size() != m) {
            parse_fail(at(w, r), "expected a row of " + std::to_string(m) + " entries");
        }
        for (std::size_t c = 0; c < m; ++c) out(r, c) = complex_entry(row[c], at(at(w, r), c));
    }
    return out;
}

Vector parse_vector(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) parse_fail(where, "expected a non-empty array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = complex_entry(j[i], at(where, i));
    return v;
}

BlockedState parse_blocked_state(const Json& j) {
    BlockedState state;
    const Json& blocks = array_field(j, "blocks", "");
    for (std::size_t n = 0; n < blocks.size(); ++n) {
        const std::string w = at("blocks", n);
        const double q = number(field(blocks[n], "Q", w), sub(w, "Q"));
        DensityMatrix rho = density(field(blocks[n], "rho", w), sub(w, "rho"));
        HermitianMatrix h = hermitian(field(blocks[n], "generator", w), sub(w, "generator"));
        state.blocks.push_back({q, std::move(rho), std::move(h)});
    }
    if (auto it = j.find("cross_generators"); it != j.end()) {
        if (!it->is_array()) parse_fail("cross_generators", "expected an array");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string w = at("cross_generators", k);
            const Json& e = (*it)[k];
            const Json& from = field(e, "from", w);
            const Json& to = field(e, "to", w);
            if (!from.is_number_unsigned()) parse_fail(sub(w, "from"), "expected a block index");
            if (!to.is_number_unsigned()) parse_fail(sub(w, "to"), "expected a block index");
            state.cross_generators.push_back(
                {from.get<std::size_t>(), to.get<std::size_t>(),
                 parse_matrix(field(e, "entries", w), sub(w, "entries"), false)});
        }
    }
    with_context("blocks", [&] { state.validate(); });
    return state;
}

Problem parse_problem(const Json& j) {
    if (!j.is_object()) parse_fail("<root>", "expected an object");
    if (j.contains("blocks")) return parse_blocked_state(j);
    if (j.contains("kind")) return parse_family(j);
    if (j.contains("rho") && j.contains("drho")) {
        DensityMatrix rho = density(j["rho"], "rho");
        HermitianMatrix drho = hermitian(j["drho"], "drho");
        if (drho.dim() != rho.dim()) {
            throw Error(ErrorKind::DimensionMismatch, "drho: dimension differs from rho");
        }
        return RhoDrhoPair{std::move(rho), std::move(drho)};
    }
    if (j.contains("rho") && j.contains("generator")) {
        const DensityMatrix rho = density(j["rho"], "rho");
        const HermitianMatrix h = hermitian(j["generator"], "generator");
        return with_context("generator", [&] { return StateFamily::unitary(h, rho); });
    }
    parse_fail("<root>", "unrecognized input: expected \"blocks\", \"kind\", or a \"rho\" pair");
}

PureEnsemble parse_ensemble(const Json& j) {
    const Json& members = array_field(j, "members", "");
    std::vector<EnsembleMember> out;
    for (std::size_t k = 0; k < members.size(); ++k) {
        const std::string w = at("members", k);
        const double q = number(field(members[k], "q", w), sub(w, "q"));
        out.push_back({q, parse_vector(field(members[k], "psi", w), sub(w, "psi"))});
    }
    return with_context("members", [&] { return PureEnsemble(std::move(out)); });
}

OrderedJson matrix_json(const Matrix& m) {
    OrderedJson j;
    if (m.rows() == m.cols()) {
        j["dim"] = m.rows();
    } else {
        j["rows"] = m.rows();
        j["cols"] = m.cols();
    }
    OrderedJson rows = OrderedJson::array();
    for (Index r = 0; r < m.rows(); ++r) {
        OrderedJson row = OrderedJson::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    j["entries"] = std::move(rows);
    return j;
}

OrderedJson vector_json(const Vector& v) {
    OrderedJson j = OrderedJson::array();
    for (Index i = 0; i < v.size(); ++i) j.push_back({v(i).real(), v(i).imag()});
    return j;
}

OrderedJson real_vector_json(const Eigen::VectorXd& v) {
    OrderedJson j = OrderedJson::array();
    for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

OrderedJson report_json(const QfiReport& report) {
    OrderedJson j;
    j["F"] = report.F;
    j["F_ct"] = report.F_ct;
    j["F_qt"] = report.F_qt;
    j["support_dim"] = report.support_dim;
    j["method"] = std::string(to_string(report.method));
    j["diagnostics"] = report.diagnostics;
    return j;
}

OrderedJson ensemble_json(const PureEnsemble& ensemble) {
    OrderedJson members = OrderedJson::array();
    for (const EnsembleMember& m : ensemble.members()) {
        OrderedJson e;
        e["q"] = m.weight;
        e["psi"] = vector_json(m.psi);
        members.push_back(std::move(e));
    }
    OrderedJson j;
    j["members"] = std::move(members);
    return j;
}

std::string dump(const OrderedJson& j) {
    std::string out;
    dump_value(j, out, 0);
    out += "\n";
    return out;
}

}  // namespace qfi::io
