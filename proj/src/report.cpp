#include "sobext/report.hpp"
#include "sobext/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sobext {

Point json_point(const nlohmann::json &j)
{
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail_validation("expected a point [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json number_json(double x)
{
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

void write_json(const std::string &path, const json &j)
{
  std::ofstream out(path);
  if (!out) fail_validation("cannot write " + path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string &path)
{
  std::ifstream in(path);
  if (!in) fail_validation("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const std::exception &e) {
    fail_validation(path + " is not valid JSON: " + e.what());
  }
}

SvgCanvas::SvgCanvas(Box view, double pixels) : view_(view)
{
  double span = std::max(view.width(), view.height());
  if (!(span > 0)) fail_validation("empty SVG view box");
  scale_ = pixels / span;
  width_ = view.width() * scale_;
  height_ = view.height() * scale_;
}

std::string SvgCanvas::xy(Point p) const
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f,%.3f", (p.real() - view_.x0) * scale_, (view_.y1 - p.imag()) * scale_);
  return buf;
}

void SvgCanvas::polygon(const std::vector<Point> &pts, const std::string &fill, const std::string &stroke,
                        double stroke_px)
{
  body_ += "<polygon fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"" + std::to_string(stroke_px) +
           "\" points=\"";
  for (auto &p : pts) body_ += xy(p) + ' ';
  body_ += "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<Point> &pts, const std::string &stroke, double stroke_px)
{
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + std::to_string(stroke_px) +
           "\" points=\"";
  for (auto &p : pts) body_ += xy(p) + ' ';
  body_ += "\"/>\n";
}

void SvgCanvas::circle(Point c, double r_px, const std::string &fill)
{
  auto s = xy(c);
  auto comma = s.find(',');
  body_ += "<circle cx=\"" + s.substr(0, comma) + "\" cy=\"" + s.substr(comma + 1) + "\" r=\"" +
           std::to_string(r_px) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::rect(Point ll, double w, double h, const std::string &fill)
{
  auto s = xy(ll + Point(0, h));
  auto comma = s.find(',');
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f\" height=\"%.3f", w * scale_, h * scale_);
  body_ += "<rect x=\"" + s.substr(0, comma) + "\" y=\"" + s.substr(comma + 1) + "\" width=\"" + buf +
           "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::text(Point p, const std::string &s, double size_px)
{
  auto c = xy(p);
  auto comma = c.find(',');
  body_ += "<text x=\"" + c.substr(0, comma) + "\" y=\"" + c.substr(comma + 1) + "\" font-size=\"" +
           std::to_string(size_px) + "\" font-family=\"sans-serif\">" + s + "</text>\n";
}

void SvgCanvas::save(const std::string &path) const
{
  std::ofstream out(path);
  if (!out) fail_validation("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
      << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body_ << "</svg>\n";
}

std::string ramp_color(double t)
{
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  if (!std::isfinite(t)) return "#bbbbbb";
  t = std::clamp(t, 0.0, 1.0) * 4;
  int k = std::min(3, (int)t);
  double u = t - k;
  char buf[16];
  int c[3];
  for (int i = 0; i < 3; ++i) c[i] = (int)std::lround(stops[k][i] * (1 - u) + stops[k + 1][i] * u);
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

} // namespace sobext
