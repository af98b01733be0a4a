#include "haptic/psychophysics/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include "haptic/core/error.hpp"
#include "haptic/core/format.hpp"

namespace haptic::psychophysics {
namespace {

Error line_error(int line, const std::string& what) {
  return Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_bool(std::string_view text, bool& out) {
  text = trim(text);
  if (text == "1" || text == "true") {
    out = true;
  } else if (text == "0" || text == "false") {
    out = false;
  } else {
    return false;
  }
  return true;
}

}  // namespace

void write_response_csv(std::ostream& out, const ResponseLedger& ledger) {
  out << kResponseCsvHeader << '\n';
  for (const Trial& t : ledger.schedule().trials()) {
    auto answer = ledger.response(t.id);
    if (!answer) continue;
    out << t.id << ',' << format_double(t.first.psi()) << ',' << format_double(t.second.psi())
        << ',' << (*answer ? 1 : 0) << '\n';
  }
}

ResponseLedger read_response_csv(std::istream& in, Pressure reference) {
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  std::vector<Trial> trials;
  std::vector<Response> responses;
  std::vector<int> seen_ids;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (!header_seen) {
      if (line_no == 1 && view.size() >= 3 && static_cast<unsigned char>(view[0]) == 0xEF) {
        view.remove_prefix(3);  // UTF-8 BOM
      }
      if (view != kResponseCsvHeader) {
        throw line_error(line_no, std::string("expected header '") + kResponseCsvHeader + "'");
      }
      header_seen = true;
      continue;
    }
    if (view.empty()) continue;

    auto fields = split_fields(view);
    if (fields.size() != 4) {
      throw line_error(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    long long id = 0;
    double first = 0.0;
    double second = 0.0;
    bool chose_second = false;
    if (!parse_int(fields[0], id) || id < 0 || id > INT32_MAX) {
      throw line_error(line_no, "bad trial_id '" + std::string(fields[0]) + "'");
    }
    if (!parse_double(fields[1], first)) {
      throw line_error(line_no, "bad first_psi '" + std::string(fields[1]) + "'");
    }
    if (!parse_double(fields[2], second)) {
      throw line_error(line_no, "bad second_psi '" + std::string(fields[2]) + "'");
    }
    if (!parse_bool(fields[3], chose_second)) {
      throw line_error(line_no, "bad chose_second '" + std::string(fields[3]) + "'");
    }
    if (std::find(seen_ids.begin(), seen_ids.end(), static_cast<int>(id)) != seen_ids.end()) {
      throw line_error(line_no, "duplicate trial_id " + std::to_string(id));
    }
    seen_ids.push_back(static_cast<int>(id));

    const bool first_is_ref = std::abs(first - reference.psi()) < 1e-9;
    const bool second_is_ref = std::abs(second - reference.psi()) < 1e-9;
    Trial t{static_cast<int>(id), Pressure::psi(first), Pressure::psi(second),
            TrialKind::test, false};
    if (first_is_ref && second_is_ref) {
      t.kind = TrialKind::bias_probe;
    } else if (first_is_ref) {
      t.test_is_second = true;
    } else if (second_is_ref) {
      t.test_is_second = false;
    } else {
      throw line_error(line_no, "neither interval holds the reference pressure " +
                                    format_double(reference.psi()));
    }
    trials.push_back(t);
    responses.push_back(Response{t.id, chose_second});
  }
  if (!header_seen) throw line_error(std::max(line_no, 1), "missing header");

  ResponseLedger ledger(TrialSchedule(reference, std::move(trials), 0));
  for (const Response& r : responses) ledger.record(r.trial_id, r.chose_second);
  return ledger;
}

ResponseLedger read_response_csv_file(const std::string& path, Pressure reference) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "cannot open " + path);
  try {
    return read_response_csv(in, reference);
  } catch (const Error& e) {
    throw Error(e.code(), path + ":" + e.what());
  }
}

nlohmann::json fit_report_json(const std::string& subject, const PsychometricFit& fit) {
  const JndReport r = jnd(fit);
  return nlohmann::json{{"subject", subject},
                        {"k", fit.k},
                        {"jnd_psi", r.jnd.psi()},
                        {"p75_psi", r.p75.psi()},
                        {"weber_pct", r.weber_fraction},
                        {"residual", fit.residual},
                        {"saturated", fit.saturated}};
}

void write_curve_csv(std::ostream& out, const PsychometricFit& fit, double lo, double hi,
                     double step) {
  out << "pressure_psi,q_model_pct\n";
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    const double p = lo + step * static_cast<double>(i);
    out << format_double(std::round(p * 1e6) / 1e6) << ','
        << format_double(psychometric_percent(p, fit.reference.psi(), fit.k)) << '\n';
  }
}

void write_points_csv(std::ostream& out, const PsychometricFit& fit) {
  out << "pressure_psi,q_observed_pct,trials\n";
  for (const DataPoint& pt : fit.points) {
    out << format_double(pt.pressure.psi()) << ',' << format_double(pt.q_percent) << ','
        << pt.trials << '\n';
  }
}

std::string render_cohort_svg(std::span<const PsychometricFit> subjects,
                              const PsychometricFit& pooled, double lo, double hi, double step) {
  constexpr double width = 640.0;
  constexpr double height = 420.0;
  constexpr double margin = 50.0;
  auto sx = [&](double p) { return margin + (p - lo) / (hi - lo) * (width - 2 * margin); };
  auto sy = [&](double q) { return height - margin - q / 100.0 * (height - 2 * margin); };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << sx(lo) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(hi) << "\" y2=\""
      << sy(0) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << sx(lo) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(lo) << "\" y2=\""
      << sy(100) << "\" stroke=\"black\"/>\n";
  for (double q : {0.0, 25.0, 50.0, 75.0, 100.0}) {
    svg << "<text x=\"" << margin - 35 << "\" y=\"" << sy(q) + 4 << "\" font-size=\"11\">" << q
        << "</text>\n";
  }
  svg << "<text x=\"" << width / 2 - 60 << "\" y=\"" << height - 12
      << "\" font-size=\"12\">Test pressure (psi)</text>\n";

  auto curve = [&](const PsychometricFit& fit, const char* colour, double stroke) {
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << stroke
        << "\" points=\"";
    for (double p = lo; p <= hi + 1e-9; p += step) {
      svg << sx(p) << ',' << sy(fit.model_percent(Pressure::psi(p))) << ' ';
    }
    svg << "\"/>\n";
  };
  for (const PsychometricFit& fit : subjects) {
    curve(fit, "#999999", 1.0);
    for (const DataPoint& pt : fit.points) {
      svg << "<circle cx=\"" << sx(pt.pressure.psi()) << "\" cy=\"" << sy(pt.q_percent)
          << "\" r=\"3\" fill=\"#777777\"/>\n";
    }
  }
  curve(pooled, "#ff7f0e", 2.5);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace haptic::psychophysics
