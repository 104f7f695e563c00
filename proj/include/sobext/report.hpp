#pragma once

#include "sobext/geometry.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace sobext {

constexpr int schema_version = 1;

using json = nlohmann::ordered_json;

inline json point_json(Point p) { return json::array({p.real(), p.imag()}); }
Point json_point(const nlohmann::json &j);

// non-finite numbers become strings so the output stays valid JSON
json number_json(double x);

void write_json(const std::string &path, const json &j);
nlohmann::json read_json(const std::string &path);

// minimal static SVG writer in a y-up coordinate frame
class SvgCanvas {
public:
  SvgCanvas(Box view, double pixels = 800);
  void polygon(const std::vector<Point> &pts, const std::string &fill, const std::string &stroke, double stroke_px = 1);
  void polyline(const std::vector<Point> &pts, const std::string &stroke, double stroke_px = 1);
  void circle(Point c, double r_px, const std::string &fill);
  void rect(Point lower_left, double w, double h, const std::string &fill);
  void text(Point p, const std::string &s, double size_px = 12);
  void save(const std::string &path) const;

private:
  Box view_;
  double scale_ = 1, width_ = 0, height_ = 0;
  std::string body_;
  std::string xy(Point p) const;
};

// viridis-like ramp, t in [0,1]
std::string ramp_color(double t);

} // namespace sobext
