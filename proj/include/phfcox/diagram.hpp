#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace phfcox {

/// One topological feature: born at `birth`, gone at `death`.
/// Essential classes carry death = +inf until regularization.
struct PersistencePair {
  int dim = 0;
  double birth = 0.0;
  double death = 0.0;

  bool essential() const { return death == std::numeric_limits<double>::infinity(); }
  bool operator==(const PersistencePair&) const = default;
};

struct PersistenceDiagram {
  int dim = 0;
  std::vector<PersistencePair> pairs;

  bool empty() const { return pairs.empty(); }
};

/// Replace every (b, +inf) with (b, b); finite pairs pass through.
PersistenceDiagram regularize_infinite(const PersistenceDiagram& d);

/// Counts of pairs by quadrant of the (birth, death) plane:
/// I=(+,+), II=(-,+), III=(-,-), IV=(+,-). A zero coordinate takes the sign
/// of the nonzero one; (0,0) lands in III. Expects a regularized diagram.
struct QuadrantCounts {
  int q[4] = {0, 0, 0, 0};
  int i() const { return q[0]; }
  int ii() const { return q[1]; }
  int iii() const { return q[2]; }
  int iv() const { return q[3]; }
};

QuadrantCounts quadrant_summary(const PersistenceDiagram& d);

/// Diagram CSV: subject_id,dim,birth,death with "inf" for essential deaths.
void write_diagrams_csv(std::ostream& out, const std::string& subject_id,
                        const std::vector<PersistenceDiagram>& diagrams,
                        bool with_header = true);

/// Reads a combined diagram CSV back into per-subject diagram triples
/// (dims 0..2, present even when empty). Preserves first-seen subject order.
struct SubjectDiagrams {
  std::string subject_id;
  std::array<PersistenceDiagram, 3> dims;
};
std::vector<SubjectDiagrams> read_diagrams_csv(std::istream& in);

}  // namespace phfcox
