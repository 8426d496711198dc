#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bidlab/domain.hpp"

namespace bidlab {

/// One parsed line of the line-oriented bidding-log format (see
/// docs/file-formats.md): advertiser_id, ISO-8601 day, seconds-of-day
/// timestamp, value, price.
struct LogRecord {
  std::string advertiser_id;
  std::string day;
  int timestamp = 0;
  double value = 0.0;
  double price = 0.0;
};

inline constexpr const char* kLogHeader = "advertiser_id,day,timestamp,value,price";

/// One advertiser-day of logged impressions, time-sorted.
struct ReplayEpisode {
  std::string day;
  std::vector<Impression> impressions;
  std::vector<int> timestamps;  ///< parallel to impressions
};

struct IngestReport {
  size_t data_lines = 0;
  size_t parsed = 0;
  size_t malformed = 0;
};

/// Parses a log file into advertiser -> day-ordered episodes. Records are
/// grouped by (advertiser, day) and stably sorted by timestamp. Malformed
/// lines are counted and skipped; more than one malformed line exceeding 1%
/// of the data lines aborts with a diagnostic.
std::map<std::string, std::vector<ReplayEpisode>> ingest(const std::string& path,
                                                         IngestReport* report = nullptr);

/// Buckets an episode's impressions into m equal time-of-day intervals
/// (m must divide 86400). Empty stages are allowed.
StageBoundaries replay_stage_partition(const ReplayEpisode& episode, int m);

/// Episode stream backed by logged impressions and the time-of-day partition.
EpisodeStream make_replay_stream(const ReplayEpisode& episode, int m);

void write_log_header(std::ostream& out);
void append_log_record(std::ostream& out, const LogRecord& record);

}  // namespace bidlab
