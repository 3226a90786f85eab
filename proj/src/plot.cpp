#include "hybreach/plot.hpp"

#include "hybreach/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

namespace hybreach {

using nlohmann::json;

namespace {

struct Box {
  std::vector<double> lo, hi;
};

std::optional<Box> box_of(const json& j) {
  if (j.is_null()) return std::nullopt;
  Box b{j.at("lower").get<std::vector<double>>(), j.at("upper").get<std::vector<double>>()};
  if (b.lo.size() != b.hi.size() || b.lo.empty()) throw Error(ErrorKind::Parse, "box with bad dimensions");
  return b;
}

// Maps state coordinates into a fixed-size canvas with y pointing up.
class Canvas {
 public:
  Canvas(double xmin, double xmax, double ymin, double ymax) {
    const double padx = 0.05 * std::max(xmax - xmin, 1e-9);
    const double pady = 0.05 * std::max(ymax - ymin, 1e-9);
    x0_ = xmin - padx;
    y0_ = ymin - pady;
    sx_ = kSize / (xmax - xmin + 2 * padx);
    sy_ = kSize / (ymax - ymin + 2 * pady);
    os_ << std::setprecision(6);
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + 2 * kMargin << "\" height=\""
        << kSize + 2 * kMargin << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void rect(const Box& b, const char* style) {
    const double x = px(b.lo[0]), y = py(b.hi[1]);
    os_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << px(b.hi[0]) - x << "\" height=\"" << py(b.lo[1]) - y
        << "\" " << style << "/>\n";
  }

  void polygon(const std::vector<std::array<double, 2>>& pts, const char* style) {
    os_ << "<polygon points=\"";
    for (const auto& p : pts) os_ << px(p[0]) << ',' << py(p[1]) << ' ';
    os_ << "\" " << style << "/>\n";
  }

  void dot(double x, double y) { os_ << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"0.8\" fill=\"#1f77b4\"/>\n"; }

  void label(const std::string& text) {
    os_ << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 8 << "\" font-family=\"sans-serif\" font-size=\"14\">"
        << text << "</text>\n";
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  static constexpr double kSize = 600.0;
  static constexpr double kMargin = 30.0;
  double px(double x) const { return kMargin + (x - x0_) * sx_; }
  double py(double y) const { return kMargin + kSize - (y - y0_) * sy_; }

  double x0_, y0_, sx_, sy_;
  std::ostringstream os_;
};

constexpr const char* kTargetStyle = "fill=\"#2ca02c\" fill-opacity=\"0.35\" stroke=\"#2ca02c\" stroke-width=\"1.5\"";
constexpr const char* kPartitionStyle = "fill=\"none\" stroke=\"#7f7f7f\" stroke-width=\"0.6\"";
constexpr const char* kBpoaStyle = "fill=\"#d62728\" fill-opacity=\"0.12\" stroke=\"#d62728\" stroke-width=\"1.2\"";
constexpr const char* kRotatedStyle = "fill=\"none\" stroke=\"#9467bd\" stroke-width=\"1.2\" stroke-dasharray=\"4 2\"";

std::vector<std::array<double, 2>> rotated_corners(const json& r) {
  const auto c = r.at("center").get<std::array<double, 2>>();
  const auto h = r.at("half_extents").get<std::array<double, 2>>();
  const double a = r.at("angle").get<double>();
  const double ca = std::cos(a), sa = std::sin(a);
  std::vector<std::array<double, 2>> pts;
  for (const auto& [s0, s1] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}) {
    const double u = s0 * h[0], v = s1 * h[1];
    pts.push_back({c[0] + u * ca - v * sa, c[1] + u * sa + v * ca});
  }
  return pts;
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
  out << text;
}

std::vector<std::filesystem::path> plot_csv(const json& a, const std::filesystem::path& out_dir,
                                            const std::string& stem) {
  std::ostringstream os;
  os << std::setprecision(17) << "kind,t,element,partition,corner,coordinates\n";
  auto emit = [&](const char* kind, int t, std::size_t e, long p, const Box& b) {
    for (const char* corner : {"lower", "upper"}) {
      const auto& v = corner[0] == 'l' ? b.lo : b.hi;
      os << kind << ',' << t << ',' << e << ',' << p << ',' << corner << ',';
      for (std::size_t k = 0; k < v.size(); ++k) os << (k ? " " : "") << v[k];
      os << '\n';
    }
  };
  emit("target", 0, 0, -1, *box_of(a.at("target")));
  for (const auto& step : a.at("steps")) {
    const int t = step.at("t").get<int>();
    std::size_t e = 0;
    for (const auto& el : step.at("elements")) {
      long p = 0;
      for (const auto& part : el.at("partitions")) emit("br_partition", t, e, p++, *box_of(part.at("region")));
      if (auto b = box_of(el.at("bpoa"))) emit("bpoa", t, e, -1, *b);
      ++e;
    }
  }
  const auto path = out_dir / (stem + ".csv");
  write(path, os.str());
  return {path};
}

}  // namespace

std::vector<std::filesystem::path> plot_artifact(const json& a, const std::filesystem::path& out_dir,
                                                 const std::string& stem) {
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(out_dir);
    if (a.at("state_dim").get<int>() != 2) return plot_csv(a, out_dir, stem);

    const Box target = *box_of(a.at("target"));
    const int horizon = a.at("horizon").get<int>();
    for (const auto& step : a.at("steps")) {
      const int t = step.at("t").get<int>();
      double xmin = target.lo[0], xmax = target.hi[0], ymin = target.lo[1], ymax = target.hi[1];
      auto grow = [&](const Box& b) {
        xmin = std::min(xmin, b.lo[0]);
        xmax = std::max(xmax, b.hi[0]);
        ymin = std::min(ymin, b.lo[1]);
        ymax = std::max(ymax, b.hi[1]);
      };
      for (const auto& el : step.at("elements")) {
        for (const auto& part : el.at("partitions")) grow(*box_of(part.at("region")));
        if (auto b = box_of(el.at("bpoa"))) grow(*b);
      }

      Canvas c(xmin, xmax, ymin, ymax);
      c.rect(target, kTargetStyle);
      for (const auto& el : step.at("elements")) {
        for (const auto& part : el.at("partitions")) c.rect(*box_of(part.at("region")), kPartitionStyle);
      }
      for (const auto& el : step.at("elements")) {
        if (auto b = box_of(el.at("bpoa"))) c.rect(*b, kBpoaStyle);
        if (el.contains("rotated")) c.polygon(rotated_corners(el.at("rotated")), kRotatedStyle);
      }
      if (t == -horizon && a.contains("mc_members")) {
        for (const auto& m : a.at("mc_members")) c.dot(m.at(0).get<double>(), m.at(1).get<double>());
      }
      c.label(a.value("config_id", std::string()) + "  t = " + std::to_string(t));
      const auto path = out_dir / (stem + "_t" + std::to_string(-t) + ".svg");
      write(path, c.finish());
      written.push_back(path);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed run artifact: ") + e.what());
  }
  return written;
}

std::vector<std::filesystem::path> plot_file(const std::filesystem::path& artifact_path,
                                             const std::filesystem::path& out_dir) {
  std::ifstream in(artifact_path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open run artifact " + artifact_path.string());
  json a;
  try {
    a = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, artifact_path.string() + ": " + e.what());
  }
  return plot_artifact(a, out_dir, artifact_path.stem().string());
}

}  // namespace hybreach
