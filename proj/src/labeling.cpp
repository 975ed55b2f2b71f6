#include "simcert/labeling.hpp"

#include <algorithm>
#include <cmath>

namespace simcert {

bool Box::contains(const Vector& y) const {
  if (y.size() != dim()) throw DimensionError("Box::contains: dimension mismatch");
  return (y.array() >= lo.array()).all() && (y.array() <= hi.array()).all();
}

bool Box::is_empty() const { return (hi.array() < lo.array()).any(); }

double Box::volume() const {
  if (is_empty()) return 0.0;
  return (hi - lo).prod();
}

double Box::distance(const Vector& y) const {
  double d2 = 0.0;
  for (Index i = 0; i < dim(); ++i) {
    const double below = lo(i) - y(i);
    const double above = y(i) - hi(i);
    const double d = std::max({below, above, 0.0});
    d2 += d * d;
  }
  return std::sqrt(d2);
}

Box Box::deflated(double eps) const {
  return Box{(lo.array() + eps).matrix(), (hi.array() - eps).matrix()};
}

Box Box::inflated(double eps) const {
  return Box{(lo.array() - eps).matrix(), (hi.array() + eps).matrix()};
}

namespace {

bool positive_volume_overlap(const Box& a, const Box& b) {
  for (Index i = 0; i < a.dim(); ++i) {
    const double lo = std::max(a.lo(i), b.lo(i));
    const double hi = std::min(a.hi(i), b.hi(i));
    if (hi - lo <= 0.0) return false;
  }
  return true;
}

}  // namespace

void LabeledPartition::validate() const {
  for (const auto& r : regions) {
    for (const auto& b : r.boxes) {
      if (b.lo.size() != dim || b.hi.size() != dim) {
        throw DimensionError("LabeledPartition: box dimension != partition dimension");
      }
    }
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (regions[i].letter == regions[j].letter) continue;
      for (const auto& a : regions[i].boxes) {
        for (const auto& b : regions[j].boxes) {
          if (positive_volume_overlap(a, b)) {
            throw InvalidParameterError("LabeledPartition: regions '" + regions[i].letter +
                                        "' and '" + regions[j].letter +
                                        "' overlap with positive volume");
          }
        }
      }
    }
  }
}

std::string LabeledPartition::label(const Vector& y) const {
  for (const auto& r : regions) {
    for (const auto& b : r.boxes) {
      if (!b.is_empty() && b.contains(y)) return r.letter;
    }
  }
  return default_letter;
}

Word label_trajectory(const LabeledPartition& partition, const std::vector<Vector>& ys) {
  Word w;
  w.reserve(ys.size());
  for (const auto& y : ys) w.push_back(partition.label(y));
  return w;
}

LabeledPartition deflate_labeling(const LabeledPartition& partition, double eps,
                                  const std::string& margin_letter) {
  if (eps < 0.0) throw InvalidParameterError("deflate_labeling: negative epsilon");
  LabeledPartition out;
  out.dim = partition.dim;
  out.default_letter = margin_letter;
  for (const auto& r : partition.regions) {
    LabeledRegion dr;
    dr.letter = r.letter;
    for (const auto& b : r.boxes) {
      Box shrunk = b.deflated(eps);
      if (!shrunk.is_empty()) dr.boxes.push_back(std::move(shrunk));
    }
    if (!dr.boxes.empty()) out.regions.push_back(std::move(dr));
  }
  return out;
}

InflatedLabeling::InflatedLabeling(const LabeledPartition& partition, double eps) {
  if (eps < 0.0) throw InvalidParameterError("inflate_labeling: negative epsilon");
  default_letter_ = partition.default_letter;
  for (const auto& r : partition.regions) {
    LabeledRegion ir;
    ir.letter = r.letter;
    for (const auto& b : r.boxes) {
      ir.boxes.push_back(b.inflated(eps));
      Box deep = b.deflated(eps);
      if (!deep.is_empty()) deep_cover_.push_back(std::move(deep));
    }
    if (!ir.boxes.empty()) inflated_.push_back(std::move(ir));
  }
}

std::vector<std::string> InflatedLabeling::letters_at(const Vector& y) const {
  std::vector<std::string> letters;
  for (const auto& r : inflated_) {
    bool inside = false;
    for (const auto& b : r.boxes) {
      if (!b.is_empty() && b.contains(y)) {
        inside = true;
        break;
      }
    }
    if (inside && std::find(letters.begin(), letters.end(), r.letter) == letters.end()) {
      letters.push_back(r.letter);
    }
  }
  bool deep = false;
  for (const auto& b : deep_cover_) {
    if (b.contains(y)) {
      deep = true;
      break;
    }
  }
  if (!deep &&
      std::find(letters.begin(), letters.end(), default_letter_) == letters.end()) {
    letters.push_back(default_letter_);
  }
  return letters;
}

InflatedLabeling inflate_labeling(const LabeledPartition& partition, double eps) {
  return InflatedLabeling(partition, eps);
}

std::vector<std::vector<std::string>> multi_label_trajectory(
    const InflatedLabeling& labeling, const std::vector<Vector>& ys) {
  std::vector<std::vector<std::string>> out;
  out.reserve(ys.size());
  for (const auto& y : ys) out.push_back(labeling.letters_at(y));
  return out;
}

}  // namespace simcert
