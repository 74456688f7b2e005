#include "minigpt/loss_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "minigpt/dataset.hpp"
#include "minigpt/error.hpp"

namespace minigpt {
namespace {

std::string num(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1, 2 or 5 times a power of ten, giving roughly `target` intervals.
double nice_step(double span, int target) {
  if (!(span > 0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return (r < 1.5 ? 1 : r < 3.5 ? 2 : r < 7.5 ? 5 : 10) * mag;
}

}  // namespace

std::string format_loss_log(const std::vector<LossRecord>& log) {
  std::string out(kLossLogHeader);
  out += '\n';
  for (const auto& r : log) {
    out += std::to_string(r.step) + ',' + num(r.train_loss) + ',' + num(r.val_loss) + ',' + num(r.lr) + ',' +
           num(r.wall_time_s) + '\n';
  }
  return out;
}

std::vector<LossRecord> parse_loss_log(std::string_view csv) {
  std::vector<LossRecord> out;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    std::string_view line = csv.substr(0, nl);
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto where = "loss log line " + std::to_string(line_no) + ": ";
    if (!header_seen) {
      if (line != kLossLogHeader) throw IoError(where + "expected header '" + std::string(kLossLogHeader) + "'");
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> fields;
    for (std::size_t pos = 0;;) {
      const auto comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma - pos));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields.size() != 5) throw IoError(where + "expected 5 fields, got " + std::to_string(fields.size()));
    LossRecord r;
    auto parse = [&](std::string_view f, auto& dst) {
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), dst);
      if (ec != std::errc() || p != f.data() + f.size())
        throw IoError(where + "cannot parse '" + std::string(f) + "'");
    };
    parse(fields[0], r.step);
    parse(fields[1], r.train_loss);
    parse(fields[2], r.val_loss);
    parse(fields[3], r.lr);
    parse(fields[4], r.wall_time_s);
    out.push_back(r);
  }
  if (!header_seen) throw IoError("loss log is empty");
  return out;
}

void write_loss_log(const std::string& path, const std::vector<LossRecord>& log) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << format_loss_log(log);
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::vector<LossRecord> read_loss_log(const std::string& path) { return parse_loss_log(read_text_file(path)); }

std::string render_loss_svg(const std::vector<LossRecord>& log, const std::string& title) {
  if (log.empty()) throw std::invalid_argument("render_loss_svg: empty log");
  constexpr double W = 720, H = 440, left = 70, right = 20, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  double x0 = static_cast<double>(log.front().step), x1 = x0;
  double y0 = log.front().train_loss, y1 = y0;
  for (const auto& r : log) {
    x0 = std::min(x0, static_cast<double>(r.step));
    x1 = std::max(x1, static_cast<double>(r.step));
    y0 = std::min({y0, r.train_loss, r.val_loss});
    y1 = std::max({y1, r.train_loss, r.val_loss});
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double ystep = nice_step(y1 - y0, 5);
  y0 = std::floor(y0 / ystep) * ystep;
  y1 = std::ceil(y1 / ystep) * ystep;
  const double xstep = nice_step(x1 - x0, 6);

  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
    << "</text>\n";
  s << "<line class=\"axis\" x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
    << top + ph << "\" stroke=\"black\"/>\n";
  s << "<line class=\"axis\" x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
    << "\" stroke=\"black\"/>\n";

  for (double x = std::ceil(x0 / xstep) * xstep; x <= x1 + 1e-9; x += xstep) {
    const double px = sx(x);
    s << "<line class=\"tick\" x1=\"" << num(px) << "\" y1=\"" << top + ph << "\" x2=\"" << num(px) << "\" y2=\""
      << top + ph + 5 << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(px) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << num(x, "%g")
      << "</text>\n";
  }
  for (double y = y0; y <= y1 + ystep * 1e-6; y += ystep) {
    const double py = sy(y);
    s << "<line class=\"tick\" x1=\"" << left - 5 << "\" y1=\"" << num(py) << "\" x2=\"" << left << "\" y2=\""
      << num(py) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << left - 8 << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << num(y, "%.3g")
      << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">step</text>\n";
  s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << top + ph / 2 << ")\">loss</text>\n";

  auto polyline = [&](const char* cls, const char* color, auto field) {
    s << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (i) s << ' ';
      s << num(sx(static_cast<double>(log[i].step))) << ',' << num(sy(field(log[i])));
    }
    s << "\"/>\n";
  };
  polyline("train", "#1f77b4", [](const LossRecord& r) { return r.train_loss; });
  polyline("val", "#d62728", [](const LossRecord& r) { return r.val_loss; });

  const auto best = std::min_element(log.begin(), log.end(),
                                     [](const LossRecord& a, const LossRecord& b) { return a.val_loss < b.val_loss; });
  const double bx = sx(static_cast<double>(best->step)), by = sy(best->val_loss);
  s << "<circle class=\"best\" cx=\"" << num(bx) << "\" cy=\"" << num(by) << "\" r=\"4\" fill=\"#d62728\"/>\n";
  s << "<text class=\"best-label\" x=\"" << num(bx + 6) << "\" y=\"" << num(by - 8) << "\">best val "
    << num(best->val_loss, "%.4f") << " @ step " << best->step << "</text>\n";

  const double lx = left + pw - 110, ly = top + 10;
  s << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly
    << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  s << "<text x=\"" << lx + 26 << "\" y=\"" << ly + 4 << "\">train</text>\n";
  s << "<line x1=\"" << lx << "\" y1=\"" << ly + 18 << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly + 18
    << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  s << "<text x=\"" << lx + 26 << "\" y=\"" << ly + 22 << "\">val</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace minigpt
