#pragma once

#include "simcert/dfa.hpp"
#include "simcert/types.hpp"

#include <string>
#include <vector>

namespace simcert {

/// Closed axis-aligned box [lo, hi] in output space.
struct Box {
  Vector lo, hi;

  Index dim() const { return lo.size(); }
  bool contains(const Vector& y) const;
  bool is_empty() const;  // some interval degenerate past empty (lo > hi)
  double volume() const;

  /// Euclidean distance from y to the box (0 inside).
  double distance(const Vector& y) const;

  /// Per-coordinate shrink by eps; may come out empty.
  Box deflated(double eps) const;
  /// Per-coordinate grow by eps (box over-approximation of the Euclidean
  /// eps-neighborhood).
  Box inflated(double eps) const;
};

struct LabeledRegion {
  std::string letter;
  std::vector<Box> boxes;
};

/// Box-partition labeling of the output space. Regions of distinct letters
/// must not overlap with positive volume; zero-volume overlaps (shared faces,
/// degenerate slabs) resolve to the first region in list order. Points in no
/// region take the default letter.
struct LabeledPartition {
  std::vector<LabeledRegion> regions;
  std::string default_letter;
  Index dim = 0;

  void validate() const;
  std::string label(const Vector& y) const;
};

using Word = std::vector<std::string>;

Word label_trajectory(const LabeledPartition& partition, const std::vector<Vector>& ys);

/// The eps-deflated labeling L^eps: every region box shrinks by eps per
/// coordinate (exact Euclidean deflation for a box), empty boxes are dropped,
/// and everything uncovered -- eroded margins and the old default region --
/// maps to the fresh margin letter.
LabeledPartition deflate_labeling(const LabeledPartition& partition, double eps,
                                  const std::string& margin_letter = kMarginLetter);

/// The (-eps)-perturbed multi-valued labeling L^{-eps}: letter a is assigned
/// at y when y lies in the box-inflated region of a. The default letter is
/// excluded only where y is at least eps deep inside some covered box, so the
/// label set only ever grows -- safe for the upper-bound direction.
class InflatedLabeling {
 public:
  InflatedLabeling(const LabeledPartition& partition, double eps);

  std::vector<std::string> letters_at(const Vector& y) const;

 private:
  std::vector<LabeledRegion> inflated_;
  std::vector<Box> deep_cover_;  // original boxes deflated by eps
  std::string default_letter_;
};

InflatedLabeling inflate_labeling(const LabeledPartition& partition, double eps);

std::vector<std::vector<std::string>> multi_label_trajectory(
    const InflatedLabeling& labeling, const std::vector<Vector>& ys);

}  // namespace simcert
