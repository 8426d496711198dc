#include "bidlab/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bidlab {
namespace {

constexpr int kSecondsPerDay = 86400;

bool parse_double(const std::string& field, double* out) {
  if (field.empty()) return false;
  char* end = nullptr;
  *out = std::strtod(field.c_str(), &end);
  return end == field.c_str() + field.size() && std::isfinite(*out);
}

bool parse_int(const std::string& field, long* out) {
  if (field.empty()) return false;
  char* end = nullptr;
  *out = std::strtol(field.c_str(), &end, 10);
  return end == field.c_str() + field.size();
}

bool parse_record(const std::string& line, LogRecord* rec) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (fields.size() != 5) return false;
  if (fields[0].empty() || fields[1].empty()) return false;
  long ts = 0;
  if (!parse_int(fields[2], &ts) || ts < 0 || ts >= kSecondsPerDay) return false;
  double value = 0.0, price = 0.0;
  if (!parse_double(fields[3], &value) || value < 0.0) return false;
  if (!parse_double(fields[4], &price) || !(price > 0.0)) return false;
  rec->advertiser_id = fields[0];
  rec->day = fields[1];
  rec->timestamp = static_cast<int>(ts);
  rec->value = value;
  rec->price = price;
  return true;
}

}  // namespace

std::map<std::string, std::vector<ReplayEpisode>> ingest(const std::string& path,
                                                         IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest: cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != kLogHeader) {
    throw std::runtime_error("ingest: " + path + " missing header '" + kLogHeader + "'");
  }

  IngestReport rep;
  // advertiser -> day -> records, in parse order (sorted stably below).
  std::map<std::string, std::map<std::string, std::vector<LogRecord>>> grouped;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rep.data_lines;
    LogRecord rec;
    if (!parse_record(line, &rec)) {
      ++rep.malformed;
      continue;
    }
    ++rep.parsed;
    grouped[rec.advertiser_id][rec.day].push_back(std::move(rec));
  }

  // A lone bad line is tolerated so tiny fixtures stay usable; anything past
  // 1% of the data lines aborts.
  if (rep.malformed > 1 &&
      static_cast<double>(rep.malformed) > 0.01 * static_cast<double>(rep.data_lines)) {
    throw std::runtime_error("ingest: " + path + " has " + std::to_string(rep.malformed) +
                             " malformed lines out of " + std::to_string(rep.data_lines));
  }

  std::map<std::string, std::vector<ReplayEpisode>> episodes;
  for (auto& [advertiser, days] : grouped) {
    auto& list = episodes[advertiser];
    for (auto& [day, records] : days) {
      std::stable_sort(records.begin(), records.end(),
                       [](const LogRecord& a, const LogRecord& b) {
                         return a.timestamp < b.timestamp;
                       });
      ReplayEpisode ep;
      ep.day = day;
      ep.impressions.reserve(records.size());
      ep.timestamps.reserve(records.size());
      for (size_t i = 0; i < records.size(); ++i) {
        Impression imp;
        imp.index = static_cast<int>(i) + 1;
        imp.value = records[i].value;
        imp.price = records[i].price;
        ep.impressions.push_back(imp);
        ep.timestamps.push_back(records[i].timestamp);
      }
      list.push_back(std::move(ep));
    }
  }
  if (report) *report = rep;
  return episodes;
}

StageBoundaries replay_stage_partition(const ReplayEpisode& episode, int m) {
  if (m < 1 || kSecondsPerDay % m != 0) {
    throw std::invalid_argument("replay_stage_partition: m must divide 86400");
  }
  const int interval = kSecondsPerDay / m;
  StageBoundaries bounds;
  bounds.lengths.assign(m, 0);
  for (int ts : episode.timestamps) {
    bounds.lengths[ts / interval] += 1;
  }
  return bounds;
}

EpisodeStream make_replay_stream(const ReplayEpisode& episode, int m) {
  EpisodeStream stream;
  stream.impressions = episode.impressions;
  stream.stages = replay_stage_partition(episode, m);
  return stream;
}

void write_log_header(std::ostream& out) { out << kLogHeader << '\n'; }

void append_log_record(std::ostream& out, const LogRecord& record) {
  char value_buf[32];
  char price_buf[32];
  std::snprintf(value_buf, sizeof(value_buf), "%.17g", record.value);
  std::snprintf(price_buf, sizeof(price_buf), "%.17g", record.price);
  out << record.advertiser_id << ',' << record.day << ',' << record.timestamp << ','
      << value_buf << ',' << price_buf << '\n';
}

}  // namespace bidlab
