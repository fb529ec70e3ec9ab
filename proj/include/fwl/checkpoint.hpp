#pragma once

#include <fstream>
#include <string>

#include "fwl/clustered_gp.hpp"
#include "fwl/config.hpp"
#include "fwl/net.hpp"

namespace fwl {

// Versioned JSON checkpoints so pipeline stages can run as separate CLI
// invocations. Doubles round-trip exactly through the JSON layer.

inline constexpr int kCheckpointVersion = 1;

inline void to_json(Json& j, const Layer& l) {
  j = Json{{"weights", l.weights}, {"bias", l.bias}, {"activation", activation_name(l.activation)}};
}

inline void from_json(const Json& j, Layer& l) {
  l.weights = j.at("weights").get<Matrix>();
  l.bias = j.at("bias").get<Vector>();
  l.activation = activation_from_name(j.at("activation").get<std::string>());
}

inline Json net_to_json(const StudentNet& net) {
  return Json{{"format_version", kCheckpointVersion},
              {"kind", "student-net"},
              {"repr_boundary", net.repr_boundary()},
              {"layers", net.layers()}};
}

inline StudentNet net_from_json(const Json& j) {
  if (j.value("format_version", 0) != kCheckpointVersion)
    throw ConfigParse("student-net checkpoint: unsupported format_version");
  return StudentNet(j.at("layers").get<std::vector<Layer>>(),
                    j.at("repr_boundary").get<std::size_t>());
}

inline void to_json(Json& j, const GpModel& m) {
  j = Json{{"kernel", m.kernel},       {"train_inputs", m.train_inputs},
           {"train_targets", m.train_targets}, {"chol_factor", m.chol_factor},
           {"alpha", m.alpha},         {"jitter", m.jitter}};
}

inline void from_json(const Json& j, GpModel& m) {
  m.kernel = j.at("kernel").get<KernelSpec>();
  m.train_inputs = j.at("train_inputs").get<Matrix>();
  m.train_targets = j.at("train_targets").get<Matrix>();
  m.chol_factor = j.at("chol_factor").get<Matrix>();
  m.alpha = j.at("alpha").get<Matrix>();
  m.jitter = j.at("jitter").get<double>();
}

inline Json teacher_to_json(const ClusteredGp& t) {
  return Json{{"format_version", kCheckpointVersion},
              {"kind", "clustered-gp"},
              {"centroids", t.centroids},
              {"members", t.members},
              {"gps", t.gps}};
}

inline ClusteredGp teacher_from_json(const Json& j) {
  if (j.value("format_version", 0) != kCheckpointVersion)
    throw ConfigParse("teacher checkpoint: unsupported format_version");
  ClusteredGp t;
  t.centroids = j.at("centroids").get<Matrix>();
  t.members = j.at("members").get<std::vector<std::vector<std::size_t>>>();
  t.gps = j.at("gps").get<std::vector<GpModel>>();
  return t;
}

inline void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Io("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw Io("write failed: " + path);
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Io("cannot open for reading: " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigParse(std::string("bad JSON in ") + path + ": " + e.what());
  }
  return j;
}

inline void save_net(const StudentNet& net, const std::string& path) {
  save_json(net_to_json(net), path);
}
inline StudentNet load_net(const std::string& path) { return net_from_json(load_json(path)); }

inline void save_teacher(const ClusteredGp& t, const std::string& path) {
  save_json(teacher_to_json(t), path);
}
inline ClusteredGp load_teacher(const std::string& path) {
  return teacher_from_json(load_json(path));
}

}  // namespace fwl
