// Copyright 2026 The PLC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// plc: command-line front end for the progressive codec.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plc/plc.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kGeneric = 1,
  kUsage = 2,
  kIo = 3,
  kFormat = 4,
  kChecksum = 5,
  kQuality = 6,
  kSweepFailures = 7,
};

std::vector<plc::Quality> to_qualities(const std::vector<double>& qs) {
  std::vector<plc::Quality> out;
  for (double q : qs) out.emplace_back(q);
  return out;
}

plc::BitstreamContainer load_container(const std::string& path) {
  return plc::BitstreamContainer::parse(plc::read_file(path));
}

std::string format_q(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", q);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

constexpr const char* kCsvHeader = "path,q,bpp,mse,psnr";

struct SweepRow {
  std::string path;
  double q = 0.0;
  double bpp = 0.0;
  double mse = 0.0;
  double psnr = 0.0;
};

// One multi-boundary container per image; every row's rate comes from the
// extracted prefix at that boundary.
std::vector<SweepRow> sweep_image(const std::string& path,
                                  const std::vector<double>& grid,
                                  const plc::ModelWeights& w) {
  const plc::Tensor x = plc::read_image(path);
  std::vector<plc::Quality> targets;
  for (double q : grid) {
    if (q > 0.0) targets.emplace_back(q);
  }
  plc::BitstreamContainer c;
  if (targets.empty()) {
    c = plc::extract_substream(plc::encode_image(x, {100}, w), plc::Quality(0));
  } else {
    c = plc::encode_image(x, targets, w);
  }
  plc::ProgressiveDecoder dec(c, w);
  const double pixels = static_cast<double>(x.height() * x.width());
  std::vector<SweepRow> rows;
  for (double q : grid) {
    dec.advance_to(plc::Quality(q));
    const plc::Tensor y = plc::quantize_8bit(dec.image());
    const double m = plc::mse(y, x);
    const auto bytes = plc::extract_substream(c, plc::Quality(q)).serialized_size();
    rows.push_back({path, q, 8.0 * static_cast<double>(bytes) / pixels, m,
                    plc::psnr_from_mse(m)});
  }
  return rows;
}

std::string format_row(const SweepRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, ",%s,%.6f,%.8g,%.4f", format_q(r.q).c_str(),
                r.bpp, r.mse, r.psnr);
  return csv_field(r.path) + buf;
}

// Averages bpp and PSNR per quality over every image in a sweep CSV.
plc::RDCurve read_curve(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw plc::IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     split_csv_line(kCsvHeader)) {
    throw plc::FormatError(path + ": expected header \"" + kCsvHeader + "\"");
  }
  std::map<double, std::pair<plc::RDPoint, int>> by_q;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) {
      throw plc::FormatError(path + ":" + std::to_string(lineno) +
                             ": expected 5 fields");
    }
    try {
      const double q = std::stod(f[1]);
      auto& [acc, n] = by_q[q];
      acc.bpp += std::stod(f[2]);
      acc.mse += std::stod(f[3]);
      acc.psnr += std::stod(f[4]);
      ++n;
    } catch (const std::logic_error&) {
      throw plc::FormatError(path + ":" + std::to_string(lineno) +
                             ": non-numeric field");
    }
  }
  plc::RDCurve curve;
  for (auto& [q, entry] : by_q) {
    auto& [acc, n] = entry;
    curve.push_back({acc.bpp / n, acc.mse / n, acc.psnr / n});
  }
  std::sort(curve.begin(), curve.end(),
            [](const plc::RDPoint& a, const plc::RDPoint& b) { return a.bpp < b.bpp; });
  return curve;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progressive learned image codec"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "plc 1.0");

  std::string weights_path, input, output, dropped_prefix, csv_path;
  std::vector<std::string> segments, images;
  std::vector<double> encode_qs{0.5, 7.5, 20, 100};
  std::vector<double> sweep_qs{0, 0.5, 5, 10, 25, 50, 100};
  double q = 0.0;
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("genweights", "Write deterministic seed weights");
  gen->add_option("--seed", seed, "RNG seed")->default_val(0);
  gen->add_option("-o,--out", output, "Output .plcw file")->required();

  auto* enc = app.add_subcommand("encode", "Encode a PPM image");
  enc->add_option("input", input, "Input .ppm")->required();
  enc->add_option("-w,--weights", weights_path, "Weights .plcw")->required();
  enc->add_option("--boundaries,--q", encode_qs,
                  "Increasing target qualities in (0, 100]")
      ->delimiter(',')
      ->capture_default_str();
  enc->add_option("-o,--out", output, "Output .plc container")->required();

  auto* dec = app.add_subcommand("decode", "Decode a container at a boundary");
  dec->add_option("input", input, "Input .plc")->required();
  dec->add_option("-w,--weights", weights_path, "Weights .plcw")->required();
  dec->add_option("--q", q, "Boundary quality (default: highest)");
  dec->add_option("-o,--out", output, "Output .ppm")->required();

  auto* ext = app.add_subcommand("extract", "Truncate a container at a boundary");
  ext->add_option("input", input, "Input .plc")->required();
  ext->add_option("--q", q, "Boundary quality")->required();
  ext->add_option("-o,--out", output, "Output .plc")->required();
  ext->add_option("--dropped", dropped_prefix,
                  "Write dropped segments to <prefix>.<k>.plcd");

  auto* app_cmd = app.add_subcommand("append", "Append detached segments");
  app_cmd->add_option("input", input, "Input .plc")->required();
  app_cmd->add_option("-s,--segment", segments, "Segment .plcd files in order")
      ->required();
  app_cmd->add_option("-o,--out", output, "Output .plc")->required();

  auto* info = app.add_subcommand("info", "Print container boundaries and sizes");
  info->add_option("input", input, "Input .plc")->required();

  auto* sweep = app.add_subcommand("sweep", "Rate/distortion versus quality as CSV");
  sweep->add_option("images", images, "Input .ppm files")->required();
  sweep->add_option("-w,--weights", weights_path, "Weights .plcw")->required();
  sweep->add_option("--q", sweep_qs, "Quality grid")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--csv", csv_path, "Output CSV (default: stdout)");

  std::string ref_csv, test_csv;
  auto* bd = app.add_subcommand("bd", "BD-rate and BD-PSNR between two sweep CSVs");
  bd->add_option("reference", ref_csv, "Reference sweep CSV")->required();
  bd->add_option("test", test_csv, "Test sweep CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      plc::save_weights(plc::generate_seed_weights(plc::ArchConfig{}, seed), output);
    } else if (*enc) {
      const plc::ModelWeights w = plc::load_weights(weights_path);
      const auto c = plc::encode_image(plc::read_image(input), to_qualities(encode_qs), w);
      plc::write_file(output, c.serialize());
    } else if (*dec) {
      const plc::ModelWeights w = plc::load_weights(weights_path);
      const auto c = load_container(input);
      const plc::Quality target(dec->count("--q") ? q : c.max_quality());
      plc::write_image(plc::decode_image(c, target, w), output);
    } else if (*ext) {
      const auto c = load_container(input);
      plc::write_file(output, plc::extract_substream(c, plc::Quality(q)).serialize());
      if (!dropped_prefix.empty()) {
        const auto dropped = plc::dropped_segments(c, plc::Quality(q));
        for (std::size_t k = 0; k < dropped.size(); ++k) {
          plc::write_file(dropped_prefix + "." + std::to_string(k) + ".plcd",
                          dropped[k].serialize());
        }
      }
    } else if (*app_cmd) {
      auto c = load_container(input);
      for (const auto& s : segments) {
        c = plc::append_delta(c, plc::DeltaSegment::parse(plc::read_file(s)));
      }
      plc::write_file(output, c.serialize());
    } else if (*info) {
      const auto c = load_container(input);
      std::printf("size %ux%u (padded %ux%u), %zu slices\n", c.header.width,
                  c.header.height, c.header.padded_width, c.header.padded_height,
                  c.slices());
      std::printf("q=0 prefix %zu bytes\n",
                  plc::extract_substream(c, plc::Quality(0)).serialized_size());
      for (const auto& s : c.header.segments) {
        std::printf("(%g, %g] +%zu bytes, prefix %zu bytes\n",
                    static_cast<double>(s.q_from), static_cast<double>(s.q_to),
                    s.total_bytes(),
                    plc::extract_substream(c, plc::Quality(s.q_to)).serialized_size());
      }
    } else if (*sweep) {
      std::vector<double> grid = sweep_qs;
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      for (double g : grid) static_cast<void>(plc::Quality(g));
      const plc::ModelWeights w = plc::load_weights(weights_path);
      std::sort(images.begin(), images.end());
      std::ostringstream out;
      out << kCsvHeader << "\n";
      int failures = 0;
      for (const auto& path : images) {
        try {
          for (const SweepRow& r : sweep_image(path, grid, w)) {
            out << format_row(r) << "\n";
          }
        } catch (const plc::Error& e) {
          std::cerr << "plc sweep: " << path << ": " << e.what() << "\n";
          out << csv_field(path) << ",NA,NA,NA,NA\n";
          ++failures;
        }
      }
      if (csv_path.empty()) {
        std::cout << out.str();
      } else {
        const std::string s = out.str();
        plc::write_file(csv_path, std::span<const std::uint8_t>(
                                      reinterpret_cast<const std::uint8_t*>(s.data()),
                                      s.size()));
      }
      if (failures > 0) return kSweepFailures;
    } else if (*bd) {
      const plc::BDResult r = plc::bd_metrics(read_curve(ref_csv), read_curve(test_csv));
      std::printf("bd_rate_percent %.6f\nbd_psnr_db %.6f\n", r.bd_rate, r.bd_psnr);
    }
  } catch (const plc::IoError& e) {
    std::cerr << "plc: " << e.what() << "\n";
    return kIo;
  } catch (const plc::ChecksumError& e) {
    std::cerr << "plc: " << e.what() << "\n";
    return kChecksum;
  } catch (const plc::QualityError& e) {
    std::cerr << "plc: " << e.what() << "\n";
    return kQuality;
  } catch (const plc::FormatError& e) {
    std::cerr << "plc: " << e.what() << "\n";
    return kFormat;
  } catch (const plc::CorruptStreamError& e) {
    std::cerr << "plc: " << e.what() << "\n";
    return kFormat;
  } catch (const std::exception& e) {
    std::cerr << "plc: " << e.what() << "\n";
    return kGeneric;
  }
  return kOk;
}
