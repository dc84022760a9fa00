#include "mbpt/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mbpt {

Matrix cholesky_factor(const Matrix& A) {
  const int n = static_cast<int>(A.rows());
  const double scale = A.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * (scale > 0.0 ? scale : 1.0);
  Matrix L = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = A(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (d < tol) throw NotPositiveDefinite("Cholesky pivot " + std::to_string(d) + " below tolerance at index " + std::to_string(j));
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = A(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  return L;
}

double log_det_spd(const Matrix& A) {
  Matrix L;
  try {
    L = cholesky_factor(A);
  } catch (const NotPositiveDefinite& e) {
    throw NotSPD(e.what());
  }
  double s = 0.0;
  for (int i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

GibbsProblem build_problem(const Matrix& A_raw, const Matrix& v_raw, double lambda) {
  if (A_raw.rows() != A_raw.cols() || v_raw.rows() != v_raw.cols() || A_raw.rows() != v_raw.rows())
    throw DimensionMismatch("A and v must be square matrices of the same dimension");
  if (lambda < 0.0) throw Error("lambda must be nonnegative");

  GibbsProblem p;
  p.N = static_cast<int>(A_raw.rows());
  p.A = 0.5 * (A_raw + A_raw.transpose());
  p.v = lambda * 0.5 * (v_raw + v_raw.transpose());
  p.lambda = lambda;

  const double a_scale = p.A.cwiseAbs().maxCoeff();
  const double v_scale = v_raw.cwiseAbs().maxCoeff();
  const double a_asym = (A_raw - A_raw.transpose()).cwiseAbs().maxCoeff();
  const double v_asym = (v_raw - v_raw.transpose()).cwiseAbs().maxCoeff();
  if (a_asym > 1e-12 * std::max(a_scale, 1e-300) || v_asym > 1e-12 * std::max(v_scale, 1e-300))
    p.asym_warning = true;

  cholesky_factor(p.A);  // validates positive definiteness
  return p;
}

GaussianReference gaussian_reference(const GibbsProblem& p) {
  GaussianReference r;
  const Matrix L = cholesky_factor(p.A);
  r.G0 = p.A.llt().solve(Matrix::Identity(p.N, p.N));
  double logdet = 0.0;
  for (int i = 0; i < p.N; ++i) logdet += std::log(L(i, i));
  logdet *= 2.0;
  r.logZ0 = 0.5 * p.N * std::log(2.0 * M_PI) - 0.5 * logdet;
  r.Omega0 = -r.logZ0;
  return r;
}

double evaluate_potential(const GibbsProblem& p, const Vector& x) {
  if (x.size() != p.N) throw DimensionMismatch("x has wrong length");
  const double quad = 0.5 * x.dot(p.A * x);
  const Vector s = x.cwiseProduct(x);
  const double quart = 0.125 * s.dot(p.v * s);
  return quad + quart;
}

namespace {

Matrix matrix_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) throw Error("field '" + name + "' must be a nonempty array of arrays");
  const int n = static_cast<int>(j.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = j.at(i);
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw DimensionMismatch("field '" + name + "' is not square");
    for (int k = 0; k < n; ++k) {
      if (!row.at(k).is_number()) throw Error("field '" + name + "' contains a non-numeric entry");
      const double val = row.at(k).get<double>();
      if (!std::isfinite(val)) throw Error("field '" + name + "' contains a non-finite entry");
      m(i, k) = val;
    }
  }
  return m;
}

}  // namespace

GibbsProblem parse_problem(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid problem JSON: ") + e.what());
  }
  if (!j.contains("A") || !j.contains("v") || !j.contains("lambda"))
    throw Error("problem JSON must contain fields A, v, lambda");
  const Matrix A = matrix_from_json(j.at("A"), "A");
  const Matrix v = matrix_from_json(j.at("v"), "v");
  if (!j.at("lambda").is_number()) throw Error("field 'lambda' must be a number");
  const double lambda = j.at("lambda").get<double>();
  if (!std::isfinite(lambda)) throw Error("field 'lambda' must be finite");
  return build_problem(A, v, lambda);
}

GibbsProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

std::string problem_to_json(const GibbsProblem& p) {
  nlohmann::json j;
  const Matrix vu = p.v_unit();
  for (int i = 0; i < p.N; ++i) {
    nlohmann::json ra = nlohmann::json::array(), rv = nlohmann::json::array();
    for (int k = 0; k < p.N; ++k) {
      ra.push_back(p.A(i, k));
      rv.push_back(vu(i, k));
    }
    j["A"].push_back(ra);
    j["v"].push_back(rv);
  }
  j["lambda"] = p.lambda;
  return j.dump(2);
}

}  // namespace mbpt
