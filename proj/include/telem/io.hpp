#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "telem/series.hpp"

namespace telem {

/// Parses one channel CSV with header `timestamp,value,label`. The label
/// column is optional; absent labels default to 0.
ChannelSeries load_channel_csv(const std::filesystem::path& file);

/// Loads every channel listed in the groups file (`channel_id,group_id`)
/// from `<channels_dir>/<channel_id>.csv`. Extra CSVs in the directory that
/// are not listed in the groups file are an error.
MultiChannelDataset load_dataset(const std::filesystem::path& channels_dir,
                                 const std::filesystem::path& groups_file);

void save_channel_csv(const ChannelSeries& series,
                      const std::filesystem::path& file);
void save_dataset(const MultiChannelDataset& dataset,
                  const std::filesystem::path& dir);

/// Event CSV: `channel_id,start,end`; empty channel_id = system-level event.
std::vector<AnomalyEvent> load_events_csv(const std::filesystem::path& file);
void save_events_csv(const std::vector<AnomalyEvent>& events,
                     const std::filesystem::path& file);

/// FNV-1a digest of a file's bytes, for run manifests.
std::string file_digest(const std::filesystem::path& file);

}  // namespace telem
