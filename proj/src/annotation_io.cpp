// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "relicforge/error.hpp"
#include "relicforge/trajectory.hpp"

namespace relicforge {

using nlohmann::json;

namespace {

double number_at(const json& obj, const char* key, std::size_t record) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw ParseError(record, std::string("missing numeric field '") + key + "'");
  }
  return it->get<double>();
}

Vec3 vec3_at(const json& obj, const char* key, std::size_t record) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array() || it->size() != 3) {
    throw ParseError(record, std::string("field '") + key + "' must be a 3-array");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!(*it)[i].is_number()) throw ParseError(record, std::string("non-numeric '") + key + "'");
    v[i] = (*it)[i].get<double>();
  }
  return v;
}

CameraPose parse_frame(const json& frame, std::size_t record, EulerConvention convention) {
  if (!frame.is_object()) throw ParseError(record, "frame must be an object");
  const double t = number_at(frame, "t", record);
  const Vec3 position = vec3_at(frame, "position", record);
  const auto rot = frame.find("rotation");
  if (rot == frame.end() || !rot->is_object()) throw ParseError(record, "missing 'rotation'");

  try {
    if (const auto q = rot->find("quat"); q != rot->end()) {
      if (!q->is_array() || q->size() != 4) throw ParseError(record, "'quat' must be [w,x,y,z]");
      for (const auto& c : *q) {
        if (!c.is_number()) throw ParseError(record, "non-numeric quaternion entry");
      }
      const Quat quat((*q)[0].get<double>(), (*q)[1].get<double>(), (*q)[2].get<double>(),
                      (*q)[3].get<double>());
      return CameraPose(position, quat, t);
    }
    constexpr double kDeg = std::numbers::pi / 180.0;
    EulerAngles e;
    e.convention = convention;
    e.yaw = number_at(*rot, "yaw", record) * kDeg;
    e.pitch = number_at(*rot, "pitch", record) * kDeg;
    e.roll = number_at(*rot, "roll", record) * kDeg;
    // Angles give the camera-to-world orientation; the pose stores the inverse.
    return CameraPose::from_matrix(position, euler_compose(e).transpose(), t);
  } catch (const ValidationError& err) {
    throw ValidationError("record " + std::to_string(record) + ": " + err.what());
  }
}

}  // namespace

Trajectory parse_annotation(std::string_view document, EulerConvention convention) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& err) {
    throw ParseError(0, std::string("invalid JSON: ") + err.what());
  }
  if (!doc.is_object()) throw ParseError(0, "document must be an object");
  const double frame_rate = number_at(doc, "frame_rate", 0);
  const auto frames = doc.find("frames");
  if (frames == doc.end() || !frames->is_array()) throw ParseError(0, "missing 'frames' array");
  if (frames->size() < 2) throw DegenerateError("clip has fewer than 2 frames");

  std::vector<CameraPose> poses;
  poses.reserve(frames->size());
  for (std::size_t i = 0; i < frames->size(); ++i) {
    poses.push_back(parse_frame((*frames)[i], i, convention));
  }
  std::string clip_id;
  if (const auto id = doc.find("clip_id"); id != doc.end() && id->is_string()) {
    clip_id = id->get<std::string>();
  }
  return Trajectory(std::move(poses), frame_rate, std::move(clip_id));
}

std::string serialize_annotation(const Trajectory& traj) {
  json doc;
  doc["frame_rate"] = traj.frame_rate();
  if (!traj.clip_id().empty()) doc["clip_id"] = traj.clip_id();
  json frames = json::array();
  for (const auto& p : traj.poses()) {
    const Quat& q = p.quaternion();
    frames.push_back({{"t", p.timestamp()},
                      {"position", {p.position().x(), p.position().y(), p.position().z()}},
                      {"rotation", {{"quat", {q.w(), q.x(), q.y(), q.z()}}}}});
  }
  doc["frames"] = std::move(frames);
  return doc.dump();
}

Trajectory load_annotation(const std::string& path, EulerConvention convention) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_annotation(buf.str(), convention);
}

void save_annotation(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << serialize_annotation(traj) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace relicforge
