#pragma once

// Finite-resolution model of a II_1 factor: M_N with normalised trace and the
// diagonal masa. Diagonal tuples are stored cellwise (one point per cell);
// diagonal values after conjugation are tracked exactly, the unitaries are
// doubles.

#include <optional>
#include <vector>

#include "majlab/majorization.hpp"
#include "majlab/matrixlab.hpp"

namespace majlab {

using CellTuple = std::vector<Point>;

struct Part {
  Point value;
  std::vector<std::size_t> cells;
};

// Distinct values of `cells` restricted to `subset`, in order of first appearance.
std::vector<Part> group_parts(const CellTuple& cells, const std::vector<std::size_t>& subset,
                              double tol = kDefaultTol);
std::vector<Part> group_parts(const CellTuple& cells, double tol = kDefaultTol);
Measure cell_measure(const CellTuple& cells, double tol = kDefaultTol);
// Each atom repeated weight * n times; throws ResolutionInsufficient if not integral.
CellTuple cells_of(const Measure& m, std::size_t n);
CellTuple refine(const CellTuple& cells, std::size_t t);

struct ResemblancePairing {
  std::vector<std::size_t> s_index, t_index;  // s part s_index[r] <-> t part t_index[r]
  std::vector<Scalar> relative_traces;
};

std::optional<ResemblancePairing> resemblance_check(const std::vector<Part>& s, const std::vector<Part>& t);

enum class ResolutionPolicy {
  Strict,   // refuse with ResolutionInsufficient
  Flatten,  // Fourier-flatten a corner whose split is not representable
};

struct EngineOptions {
  std::size_t depth = 12;
  bool finalize = true;
  bool auto_n = false;
  std::size_t resolution = 0;  // explicit N for measure inputs (0 = smallest)
  std::size_t max_n = 5000;
  ResolutionPolicy policy = ResolutionPolicy::Strict;
  bool build_unitary = true;
  double tol = kDefaultTol;
};

struct EngineStats {
  std::size_t rotations = 0;
  std::size_t fourier_blocks = 0;
  bool flattened = false;  // Flatten policy fired
};

struct LemmaStepResult {
  UnitaryMatrix u;
  CellTuple diagonal;  // exact diagonal of B = U (S + T) U*
  std::vector<std::size_t> q, r, rest;
  std::vector<Part> r_parts, rest_parts;
  Scalar tau_p;  // trace of the smaller corner
  std::size_t m = 0;
  EngineStats stats;
};

// S lives on the cells of `s`, T on the cells of `t`; together they cover all cells.
LemmaStepResult lemma_ind_step(const CellTuple& cells, const std::vector<Part>& s, const std::vector<Part>& t,
                               const EngineOptions& opts = {});

struct ScalarEngineResult {
  std::size_t n = 0;
  UnitaryMatrix u;
  CellTuple source;
  CellTuple diagonal;
  Point mean;
  std::vector<std::size_t> q, residual;
  std::vector<Scalar> q_traces;  // tau(Q_j) after each level
  double readout_error = 0;      // numeric diagonal vs exact bookkeeping
  EngineStats stats;
};

ScalarEngineResult scalar_diagonal_engine(const CellTuple& cells, const EngineOptions& opts = {});
ScalarEngineResult scalar_diagonal_engine(const Measure& m, const EngineOptions& opts = {});

// U = sum_b J_rows U_b J_cols^T with row sets and column sets partitioning the cells.
struct BlockUnitary {
  struct Block {
    std::vector<std::size_t> rows, cols;
    CMatrix u;
  };
  std::size_t n = 0;
  std::vector<Block> blocks;

  double defect() const;
  CMatrix dense() const;
  // diagonal of U diag(s) U* for a cell tuple (one point per cell)
  std::vector<std::vector<double>> readout(const CellTuple& s) const;
};

struct SchurHornResult {
  std::size_t n = 0;
  BlockUnitary u;
  double defect = 0;
  CellTuple source;    // cells of S
  CellTuple target;    // requested diagonal, cellwise
  CellTuple diagonal;  // exact achieved diagonal
  TransportMatrix witness;
  double readout_error = 0;  // numeric vs exact diagonal
  double max_error = 0;      // numeric diagonal vs target cells
  EngineStats stats;
};

SchurHornResult schur_horn_engine(const Measure& target, const Measure& source, const EngineOptions& opts = {},
                                  const std::optional<TransportMatrix>& witness = std::nullopt);
// Cell tuples of equal length; the target is realised on its own cells.
SchurHornResult schur_horn_engine(const CellTuple& target, const CellTuple& source, const EngineOptions& opts = {},
                                  const std::optional<TransportMatrix>& witness = std::nullopt);

struct ApproxSchurHornResult {
  SchurHornResult sh;
  Scalar eps;
  std::size_t refinement = 1;  // each model cell split into this many cells
  double lp_deviation = 0;     // optimal t of the discretised transport LP
  double grouping_error = 0;   // max |A - group mean|
  double max_error = 0;        // measured against the original A and S
  bool exact_path = false;     // A < S exactly, solved without discretisation
};

ApproxSchurHornResult approx_schur_horn(const CellTuple& target, const CellTuple& source, double eps,
                                        const EngineOptions& opts = {});

struct CarpenterResult {
  SchurHornResult sh;
  Measure projections;                 // joint spectral measure of P (0/1 atoms)
  double projection_defect = 0;        // max ||P_i^2 - P_i||, ||P_i - P_i*||
  double commutation_defect = 0;       // max ||P_i P_j - P_j P_i||
};

CarpenterResult carpenter_exact(const Measure& a, const EngineOptions& opts = {});

struct UnitaryDiagonalResult {
  SchurHornResult sh;
  Measure spectrum;       // spectrum of V on the unit circle, as points of R^2
  double unitary_defect = 0;
};

UnitaryDiagonalResult unitary_diagonal(const Measure& a, const EngineOptions& opts = {});

}  // namespace majlab
