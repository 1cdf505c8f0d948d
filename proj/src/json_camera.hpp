#pragma once

// Internal camera <-> JSON helpers shared by io, synth, and the CLI. Kept
// out of the public headers so vendor json stays an implementation detail.

#include <json.hpp>

#include <cmath>

#include "visgeom/errors.hpp"
#include "visgeom/geometry.hpp"

namespace visgeom::detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json camera_to_json(const CameraIntrinsics& intr,
                                   const CameraExtrinsics& extr) {
  ordered_json j;
  j["width"] = intr.width;
  j["height"] = intr.height;
  j["fx"] = intr.fx;
  j["fy"] = intr.fy;
  j["cx"] = intr.cx;
  j["cy"] = intr.cy;
  j["skew"] = intr.skew;
  j["quat"] = {extr.q(0), extr.q(1), extr.q(2), extr.q(3)};
  j["t"] = {extr.t(0), extr.t(1), extr.t(2)};
  return j;
}

inline void camera_from_json(const ordered_json& j, CameraIntrinsics& intr,
                             CameraExtrinsics& extr) {
  auto require = [&](const char* key) -> const ordered_json& {
    const auto it = j.find(key);
    if (it == j.end())
      throw ParseError(0, std::string("camera field '") + key + "'",
                       "missing key");
    return *it;
  };
  try {
    intr.width = require("width").get<int>();
    intr.height = require("height").get<int>();
    intr.fx = require("fx").get<double>();
    intr.fy = require("fy").get<double>();
    intr.cx = require("cx").get<double>();
    intr.cy = require("cy").get<double>();
    intr.skew = j.value("skew", 0.0);
    const auto& q = require("quat");
    const auto& t = require("t");
    if (!q.is_array() || q.size() != 4 || !t.is_array() || t.size() != 3)
      throw ParseError(0, "4-element quat and 3-element t arrays",
                       "wrong arity");
    extr.q = Vec4(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                  q[3].get<double>());
    extr.t = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, "numeric camera fields", e.what());
  }
  if (std::abs(extr.q.norm() - 1.0) > 1e-9)
    throw ParseError(0, "unit quaternion", "quat norm differs from 1");
  intr.validate();
}

}  // namespace visgeom::detail
