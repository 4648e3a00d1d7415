#include "viwo/dataset.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace viwo {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DatasetError(DatasetError::Kind::MissingFile, "missing file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << content;
}

/// Split a text buffer into lines, keeping 1-based numbering for errors.
struct LineScanner {
  const std::string &text;
  size_t pos = 0;
  int line_no = 0;

  bool next(std::string_view &line) {
    while (pos < text.size()) {
      size_t end = text.find('\n', pos);
      if (end == std::string::npos) {
        end = text.size();
      }
      line = std::string_view(text).substr(pos, end - pos);
      pos = end + 1;
      line_no++;
      if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
      }
      if (line.empty() || line.front() == '#') {
        continue;
      }
      return true;
    }
    return false;
  }
};

/// Parse exactly n fields separated by sep from line; throws on malformed rows.
void parse_fields(std::string_view line, char sep, double *out, int n,
                  const std::string &file, int line_no) {
  size_t pos = 0;
  for (int i = 0; i < n; i++) {
    while (pos < line.size() && line[pos] == ' ') {
      pos++;
    }
    size_t end;
    if (sep == ' ') {
      end = line.find_first_of(' ', pos);
    } else {
      end = line.find(sep, pos);
    }
    if (end == std::string::npos) {
      end = line.size();
    }
    if (pos >= end) {
      throw DatasetError(DatasetError::Kind::Parse,
                         file + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(n) + " fields");
    }
    const char *first = line.data() + pos;
    const char *last = line.data() + end;
    const auto res = std::from_chars(first, last, out[i]);
    if (res.ec != std::errc() || res.ptr != last) {
      throw DatasetError(DatasetError::Kind::Parse,
                         file + ":" + std::to_string(line_no) + ": bad number '" +
                             std::string(first, last) + "'");
    }
    pos = end + (end < line.size() ? 1 : 0);
    if (i == n - 1 && end != line.size()) {
      throw DatasetError(DatasetError::Kind::Parse,
                         file + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(n) + " fields");
    }
  }
}

void check_monotonic(double prev, double t, const std::string &file, int line_no,
                     bool strict) {
  const bool bad = strict ? t <= prev : t < prev;
  if (bad) {
    throw DatasetError(DatasetError::Kind::NonMonotonic,
                       file + ":" + std::to_string(line_no) +
                           ": timestamps not sorted");
  }
}

} // namespace

void write_tum(const std::string &path, const std::vector<TumPose> &poses) {
  std::string out = "# t px py pz qx qy qz qw\n";
  for (const auto &pose : poses) {
    Eigen::Quaterniond q = pose.q;
    if (q.w() < 0.0) {
      q.coeffs() = -q.coeffs();
    }
    out += format_double(pose.t) + " " + format_double(pose.p.x()) + " " +
           format_double(pose.p.y()) + " " + format_double(pose.p.z()) + " " +
           format_double(q.x()) + " " + format_double(q.y()) + " " +
           format_double(q.z()) + " " + format_double(q.w()) + "\n";
  }
  write_file(path, out);
}

std::vector<TumPose> load_tum(const std::string &path) {
  const std::string text = read_file(path);
  std::vector<TumPose> poses;
  LineScanner scan{text};
  std::string_view line;
  double prev = -std::numeric_limits<double>::infinity();
  while (scan.next(line)) {
    double f[8];
    parse_fields(line, ' ', f, 8, path, scan.line_no);
    check_monotonic(prev, f[0], path, scan.line_no, true);
    prev = f[0];
    TumPose pose;
    pose.t = f[0];
    pose.p = Eigen::Vector3d(f[1], f[2], f[3]);
    pose.q = Eigen::Quaterniond(f[7], f[4], f[5], f[6]);
    if (std::abs(pose.q.norm() - 1.0) > 1e-6) {
      throw DatasetError(DatasetError::Kind::Parse,
                         path + ":" + std::to_string(scan.line_no) +
                             ": quaternion not unit norm");
    }
    pose.q.normalize();
    poses.push_back(pose);
  }
  return poses;
}

void write_dataset(const std::string &dir, const SimDataset &sim,
                   const SimConfig &cfg) {
  fs::create_directories(dir);

  {
    std::string out = "# t,wx,wy,wz,ax,ay,az\n";
    for (const auto &s : sim.imu) {
      out += format_double(s.t) + "," + format_double(s.w.x()) + "," +
             format_double(s.w.y()) + "," + format_double(s.w.z()) + "," +
             format_double(s.a.x()) + "," + format_double(s.a.y()) + "," +
             format_double(s.a.z()) + "\n";
    }
    write_file(dir + "/imu.csv", out);
  }
  {
    std::string out = "# t,vx,wz\n";
    for (const auto &s : sim.wheel) {
      out += format_double(s.t) + "," + format_double(s.vx) + "," +
             format_double(s.wz) + "\n";
    }
    write_file(dir + "/wheel.csv", out);
  }
  {
    std::string out = "# t,feature_id,u,v\n";
    for (const auto &frame : sim.frames) {
      for (const auto &fp : frame.points) {
        out += format_double(frame.t) + "," + std::to_string(fp.id) + "," +
               format_double(fp.uv.x()) + "," + format_double(fp.uv.y()) + "\n";
      }
    }
    write_file(dir + "/point_tracks.csv", out);
  }
  {
    std::string out = "# t,line_id,us,vs,ue,ve\n";
    for (const auto &frame : sim.frames) {
      for (const auto &seg : frame.segs) {
        out += format_double(frame.t) + "," + std::to_string(seg.id) + "," +
               format_double(seg.ps.x()) + "," + format_double(seg.ps.y()) + "," +
               format_double(seg.pe.x()) + "," + format_double(seg.pe.y()) + "\n";
      }
    }
    write_file(dir + "/line_segments.csv", out);
  }
  {
    std::vector<TumPose> poses;
    poses.reserve(sim.gt.size());
    for (const auto &g : sim.gt) {
      TumPose pose;
      pose.t = g.t;
      pose.p = g.p_IinG;
      pose.q = g.R_GtoI.inverse().quat();
      poses.push_back(pose);
    }
    write_tum(dir + "/groundtruth.txt", poses);
  }
  {
    CalibConfig calib;
    calib.cam = cfg.cam;
    calib.wheel_ext = cfg.wheel_ext;
    calib.gravity = cfg.gravity_mag;
    write_file(dir + "/calib.json", serialize_calib(calib));
  }
  {
    std::string out = "# id,dynamic,x,y,z,vx,vy,vz\n";
    for (const auto &p : sim.world.points) {
      out += std::to_string(p.id) + "," + (p.dynamic ? "1" : "0") + "," +
             format_double(p.p.x()) + "," + format_double(p.p.y()) + "," +
             format_double(p.p.z()) + "," + format_double(p.vel.x()) + "," +
             format_double(p.vel.y()) + "," + format_double(p.vel.z()) + "\n";
    }
    write_file(dir + "/sim_points.csv", out);
  }
  {
    std::string out = "# id,axis,x1,y1,z1,x2,y2,z2\n";
    for (const auto &l : sim.world.lines) {
      out += std::to_string(l.id) + "," + std::to_string(static_cast<int>(l.axis)) +
             "," + format_double(l.p1.x()) + "," + format_double(l.p1.y()) + "," +
             format_double(l.p1.z()) + "," + format_double(l.p2.x()) + "," +
             format_double(l.p2.y()) + "," + format_double(l.p2.z()) + "\n";
    }
    write_file(dir + "/sim_lines.csv", out);
  }
}

Dataset make_dataset(const SimDataset &sim, const SimConfig &cfg) {
  Dataset ds;
  ds.cam = cfg.cam;
  ds.wheel_ext = cfg.wheel_ext;
  ds.gravity = cfg.gravity_mag;
  ds.imu = sim.imu;
  ds.wheel = sim.wheel;
  ds.frames = sim.frames;
  ds.gt.reserve(sim.gt.size());
  for (const auto &g : sim.gt) {
    TumPose pose;
    pose.t = g.t;
    pose.p = g.p_IinG;
    pose.q = g.R_GtoI.inverse().quat();
    if (pose.q.w() < 0.0) {
      pose.q.coeffs() = -pose.q.coeffs();
    }
    pose.q.normalize();
    ds.gt.push_back(pose);
  }
  return ds;
}

Dataset load_dataset(const std::string &dir) {
  Dataset ds;

  {
    CalibConfig calib;
    try {
      calib = parse_calib(read_file(dir + "/calib.json"));
    } catch (const ConfigError &e) {
      throw DatasetError(DatasetError::Kind::Parse,
                         dir + "/calib.json: " + e.what());
    }
    ds.cam = calib.cam;
    ds.wheel_ext = calib.wheel_ext;
    ds.gravity = calib.gravity;
  }

  {
    const std::string path = dir + "/imu.csv";
    const std::string text = read_file(path);
    LineScanner scan{text};
    std::string_view line;
    double prev = -std::numeric_limits<double>::infinity();
    while (scan.next(line)) {
      double f[7];
      parse_fields(line, ',', f, 7, path, scan.line_no);
      check_monotonic(prev, f[0], path, scan.line_no, true);
      prev = f[0];
      ds.imu.push_back({f[0], {f[1], f[2], f[3]}, {f[4], f[5], f[6]}});
    }
  }
  {
    const std::string path = dir + "/wheel.csv";
    const std::string text = read_file(path);
    LineScanner scan{text};
    std::string_view line;
    double prev = -std::numeric_limits<double>::infinity();
    while (scan.next(line)) {
      double f[3];
      parse_fields(line, ',', f, 3, path, scan.line_no);
      check_monotonic(prev, f[0], path, scan.line_no, true);
      prev = f[0];
      ds.wheel.push_back({f[0], f[1], f[2]});
    }
  }

  // Observation rows arrive grouped by frame timestamp; merge points and
  // segments that share an exact timestamp into one frame.
  std::map<double, Frame> frames;
  {
    const std::string path = dir + "/point_tracks.csv";
    const std::string text = read_file(path);
    LineScanner scan{text};
    std::string_view line;
    double prev = -std::numeric_limits<double>::infinity();
    while (scan.next(line)) {
      double f[4];
      parse_fields(line, ',', f, 4, path, scan.line_no);
      check_monotonic(prev, f[0], path, scan.line_no, false);
      prev = f[0];
      Frame &frame = frames[f[0]];
      frame.t = f[0];
      frame.points.push_back({static_cast<long>(f[1]), {f[2], f[3]}});
    }
  }
  {
    const std::string path = dir + "/line_segments.csv";
    const std::string text = read_file(path);
    LineScanner scan{text};
    std::string_view line;
    double prev = -std::numeric_limits<double>::infinity();
    while (scan.next(line)) {
      double f[6];
      parse_fields(line, ',', f, 6, path, scan.line_no);
      check_monotonic(prev, f[0], path, scan.line_no, false);
      prev = f[0];
      Frame &frame = frames[f[0]];
      frame.t = f[0];
      LineSegment2D seg;
      seg.id = static_cast<long>(f[1]);
      seg.t = f[0];
      seg.ps = Eigen::Vector2d(f[2], f[3]);
      seg.pe = Eigen::Vector2d(f[4], f[5]);
      frame.segs.push_back(seg);
    }
  }
  ds.frames.reserve(frames.size());
  for (auto &[t, frame] : frames) {
    ds.frames.push_back(std::move(frame));
  }

  ds.gt = load_tum(dir + "/groundtruth.txt");
  return ds;
}

std::map<long, SimPointInfo> load_sim_points(const std::string &dir) {
  const std::string path = dir + "/sim_points.csv";
  const std::string text = read_file(path);
  std::map<long, SimPointInfo> out;
  LineScanner scan{text};
  std::string_view line;
  while (scan.next(line)) {
    double f[8];
    parse_fields(line, ',', f, 8, path, scan.line_no);
    SimPointInfo info;
    info.dynamic = f[1] != 0.0;
    info.p = Eigen::Vector3d(f[2], f[3], f[4]);
    info.vel = Eigen::Vector3d(f[5], f[6], f[7]);
    out[static_cast<long>(f[0])] = info;
  }
  return out;
}

std::map<long, SimLineInfo> load_sim_lines(const std::string &dir) {
  const std::string path = dir + "/sim_lines.csv";
  const std::string text = read_file(path);
  std::map<long, SimLineInfo> out;
  LineScanner scan{text};
  std::string_view line;
  while (scan.next(line)) {
    double f[8];
    parse_fields(line, ',', f, 8, path, scan.line_no);
    SimLineInfo info;
    info.axis = static_cast<AxisClass>(static_cast<int>(f[1]));
    info.p1 = Eigen::Vector3d(f[2], f[3], f[4]);
    info.p2 = Eigen::Vector3d(f[5], f[6], f[7]);
    out[static_cast<long>(f[0])] = info;
  }
  return out;
}

} // namespace viwo
