#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "fwl/errors.hpp"
#include "fwl/vecmat.hpp"

namespace fwl {

enum class FidelityTier { Strong, Weak, Soft };

inline const char* tier_name(FidelityTier t) {
  switch (t) {
    case FidelityTier::Strong: return "strong";
    case FidelityTier::Weak: return "weak";
    case FidelityTier::Soft: return "soft";
  }
  return "?";
}

inline FidelityTier tier_from_name(const std::string& s) {
  if (s == "strong") return FidelityTier::Strong;
  if (s == "weak") return FidelityTier::Weak;
  if (s == "soft") return FidelityTier::Soft;
  throw ConfigParse("unknown fidelity tier: " + s);
}

/// A dataset with one label quality tier. Soft sets additionally carry the
/// teacher's per-sample uncertainty Sigma.
struct LabeledSet {
  Matrix inputs;   // n x d
  Matrix labels;   // n x p
  FidelityTier tier = FidelityTier::Weak;
  std::optional<Vector> confidences;  // Sigma per sample; present iff tier == Soft

  std::size_t size() const { return inputs.rows(); }
  std::size_t input_dim() const { return inputs.cols(); }
  std::size_t label_dim() const { return labels.cols(); }

  void validate() const {
    if (labels.rows() != inputs.rows())
      throw DimensionMismatch("LabeledSet: inputs/labels row mismatch");
    if (confidences.has_value() != (tier == FidelityTier::Soft))
      throw MissingConfidences("LabeledSet: confidences present iff tier is soft");
    if (confidences) {
      if (confidences->size() != inputs.rows())
        throw DimensionMismatch("LabeledSet: confidences length mismatch");
      for (double c : *confidences)
        if (!(c >= 0.0)) throw NegativeInput("LabeledSet: negative confidence");
    }
  }

  /// Rows `idx` of this set, in the given order.
  LabeledSet subset(const std::vector<std::size_t>& idx) const {
    LabeledSet out;
    out.tier = tier;
    out.inputs = Matrix(idx.size(), input_dim());
    out.labels = Matrix(idx.size(), label_dim());
    if (confidences) out.confidences = Vector(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      out.inputs.set_row(r, inputs.row(idx[r]));
      out.labels.set_row(r, labels.row(idx[r]));
      if (confidences) (*out.confidences)[r] = (*confidences)[idx[r]];
    }
    return out;
  }

  /// First max(1, round(fraction*n)) rows.
  LabeledSet head_fraction(double fraction) const {
    if (!(fraction > 0.0) || fraction > 1.0)
      throw ConfigParse("head_fraction: fraction must be in (0, 1]");
    std::size_t m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(size())));
    if (m == 0) m = 1;
    if (m > size()) m = size();
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    return subset(idx);
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// CSV schema: x0..x{d-1}, y0..y{p-1}, tier [, sigma for soft sets].
inline void save_dataset_csv(const LabeledSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Io("cannot open for writing: " + path);
  const std::size_t d = set.input_dim(), p = set.label_dim();
  for (std::size_t j = 0; j < d; ++j) out << "x" << j << ",";
  for (std::size_t j = 0; j < p; ++j) out << "y" << j << ",";
  out << "tier";
  if (set.confidences) out << ",sigma";
  out << "\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out << detail::format_double(set.inputs(i, j)) << ",";
    for (std::size_t j = 0; j < p; ++j) out << detail::format_double(set.labels(i, j)) << ",";
    out << tier_name(set.tier);
    if (set.confidences) out << "," << detail::format_double((*set.confidences)[i]);
    out << "\n";
  }
  if (!out) throw Io("write failed: " + path);
}

inline LabeledSet load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Io("cannot open for reading: " + path);
  std::string header;
  if (!std::getline(in, header)) throw Io("empty dataset file: " + path);

  std::size_t d = 0, p = 0;
  bool has_sigma = false;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) {
      if (col.rfind("x", 0) == 0 && col != "x") ++d;
      else if (col.rfind("y", 0) == 0) ++p;
      else if (col == "sigma") has_sigma = true;
      else if (col != "tier") throw ConfigParse("unexpected dataset column: " + col);
    }
  }

  std::vector<double> xs, ys, sigmas;
  std::optional<FidelityTier> tier;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t j = 0; j < d; ++j) {
      std::getline(ss, cell, ',');
      xs.push_back(std::stod(cell));
    }
    for (std::size_t j = 0; j < p; ++j) {
      std::getline(ss, cell, ',');
      ys.push_back(std::stod(cell));
    }
    std::getline(ss, cell, ',');
    const FidelityTier row_tier = tier_from_name(cell);
    if (tier && *tier != row_tier) throw ConfigParse("mixed tiers in dataset file");
    tier = row_tier;
    if (has_sigma) {
      std::getline(ss, cell, ',');
      sigmas.push_back(std::stod(cell));
    }
    ++n;
  }

  LabeledSet set;
  set.inputs = Matrix(n, d, std::move(xs));
  set.labels = Matrix(n, p, std::move(ys));
  set.tier = tier.value_or(FidelityTier::Weak);
  if (has_sigma) set.confidences = Vector(std::move(sigmas));
  set.validate();
  return set;
}

}  // namespace fwl
