#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qvdp/error.hpp"

namespace qvdp {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

enum class SlotKind { Qubit, Mode };

// Ordered subsystem dimensions. Slot kinds disambiguate a qubit from a
// two-level Fock truncation.
struct SpaceLayout {
  std::vector<int> dims;
  std::vector<SlotKind> kinds;

  SpaceLayout() = default;
  SpaceLayout(std::vector<int> d, std::vector<SlotKind> k);

  static SpaceLayout modes(const std::vector<int>& cutoffs);
  static SpaceLayout qubit_modes(const std::vector<int>& cutoffs);

  int total() const;
  std::size_t slots() const { return dims.size(); }
  int mode_count() const;
  bool has_qubit_slot0() const { return !kinds.empty() && kinds[0] == SlotKind::Qubit; }
  // Product of dims after `slot`, i.e. the stride of that slot's index.
  int stride(std::size_t slot) const;
  std::string str() const;

  bool operator==(const SpaceLayout& o) const { return dims == o.dims && kinds == o.kinds; }
  bool operator!=(const SpaceLayout& o) const { return !(*this == o); }
};

struct OperatorMatrix {
  SpaceLayout layout;
  Mat m;
  std::vector<std::string> warnings;

  OperatorMatrix() = default;
  OperatorMatrix(SpaceLayout l, Mat mat);

  OperatorMatrix adjoint() const;
  OperatorMatrix operator*(const OperatorMatrix& o) const;
  OperatorMatrix operator+(const OperatorMatrix& o) const;
  OperatorMatrix operator-(const OperatorMatrix& o) const;
  OperatorMatrix operator*(cplx s) const;
};

class QuantumState {
 public:
  static constexpr double kTraceTol = 1e-8;
  static constexpr double kHermTol = 1e-10;
  static constexpr double kPosTol = 1e-6;

  QuantumState(SpaceLayout layout, Mat rho, double trace_tol = kTraceTol,
               double herm_tol = kHermTol);

  const SpaceLayout& layout() const { return layout_; }
  const Mat& rho() const { return rho_; }
  int dim() const { return layout_.total(); }

  double min_eigenvalue() const;
  // Throws InvalidState when the smallest eigenvalue is below -tol.
  void check_positive(double tol = kPosTol) const;

 private:
  SpaceLayout layout_;
  Mat rho_;
};

double max_abs(const Mat& m);
double hermiticity_error(const Mat& m);

OperatorMatrix identity(const SpaceLayout& layout);
OperatorMatrix annihilation(int cutoff);
OperatorMatrix creation(int cutoff);
OperatorMatrix number_op(int cutoff);
OperatorMatrix sigma_plus();   // |up><down|, up = index 0
OperatorMatrix sigma_minus();
OperatorMatrix sigma_x();
OperatorMatrix sigma_y();
OperatorMatrix sigma_z();

OperatorMatrix embed(const OperatorMatrix& op, std::size_t slot, const SpaceLayout& layout);
// Annihilation operator of the slot-th subsystem, embedded in `layout`.
OperatorMatrix mode_op(std::size_t slot, const SpaceLayout& layout);

OperatorMatrix displacement(cplx beta, int cutoff);

struct StateSpec {
  enum class Kind { Vacuum, Fock, Coherent, CatMixture } kind = Kind::Vacuum;
  int n = 0;
  cplx alpha{0.0, 0.0};

  static StateSpec vacuum() { return {}; }
  static StateSpec fock(int n) { return {Kind::Fock, n, {}}; }
  static StateSpec coherent(cplx a) { return {Kind::Coherent, 0, a}; }
  static StateSpec cat_mixture(cplx a) { return {Kind::CatMixture, 0, a}; }
};

QuantumState canonical_state(const StateSpec& spec, int cutoff);
QuantumState pure_state(const SpaceLayout& layout, const Vec& psi);
QuantumState tensor(const QuantumState& a, const QuantumState& b);
QuantumState partial_trace(const QuantumState& state, const std::vector<std::size_t>& keep);
cplx expectation(const QuantumState& state, const OperatorMatrix& op);

// Populations of the top two Fock levels of every mode, maximised over modes.
double top_population(const QuantumState& state);

}  // namespace qvdp
