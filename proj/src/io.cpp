#include "telem/io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace telem {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::int64_t parse_int(const std::string& s, const std::string& where) {
    std::int64_t v = 0;
    auto t = strip(s);
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw std::runtime_error(where + ": bad integer '" + s + "'");
    return v;
}

double parse_double(const std::string& s, const std::string& where) {
    auto t = strip(s);
    try {
        std::size_t pos = 0;
        double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(where + ": bad number '" + s + "'");
    }
}

}  // namespace

ChannelSeries load_channel_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(file.string() + ": empty file");
    auto header = split_csv_line(strip(line));
    if (header.size() < 2 || strip(header[0]) != "timestamp" ||
        strip(header[1]) != "value")
        throw std::runtime_error(file.string() +
                                 ": expected header timestamp,value[,label]");
    const bool has_label = header.size() >= 3 && strip(header[2]) == "label";

    ChannelSeries s;
    s.channel_id = file.stem().string();
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = strip(line);
        if (t.empty()) continue;
        auto fields = split_csv_line(t);
        const std::string where = file.string() + ":" + std::to_string(lineno);
        if (fields.size() < 2) throw std::runtime_error(where + ": too few fields");
        s.timestamps.push_back(parse_int(fields[0], where));
        s.values.push_back(parse_double(fields[1], where));
        std::uint8_t label = 0;
        if (has_label && fields.size() >= 3 && !strip(fields[2]).empty()) {
            auto l = parse_int(fields[2], where);
            if (l != 0 && l != 1)
                throw std::runtime_error(where + ": label not in {0,1}");
            label = static_cast<std::uint8_t>(l);
        }
        s.labels.push_back(label);
    }
    s.validate();
    return s;
}

MultiChannelDataset load_dataset(const std::filesystem::path& channels_dir,
                                 const std::filesystem::path& groups_file) {
    std::ifstream in(groups_file);
    if (!in) throw std::runtime_error("cannot open " + groups_file.string());

    MultiChannelDataset ds;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(groups_file.string() + ": empty file");
    if (strip(line) != "channel_id,group_id")
        throw std::runtime_error(groups_file.string() +
                                 ": expected header channel_id,group_id");
    std::vector<std::string> channel_order;
    while (std::getline(in, line)) {
        auto t = strip(line);
        if (t.empty()) continue;
        auto fields = split_csv_line(t);
        if (fields.size() != 2)
            throw std::runtime_error(groups_file.string() + ": bad row '" + t + "'");
        ds.groups[strip(fields[1])].push_back(strip(fields[0]));
        channel_order.push_back(strip(fields[0]));
    }
    for (const auto& cid : channel_order)
        ds.channels.push_back(load_channel_csv(channels_dir / (cid + ".csv")));

    // Listed channels must account for every CSV present.
    std::set<std::string> listed(channel_order.begin(), channel_order.end());
    for (const auto& entry : std::filesystem::directory_iterator(channels_dir)) {
        if (entry.path().extension() != ".csv") continue;
        if (!listed.count(entry.path().stem().string()))
            throw std::runtime_error("channel '" + entry.path().stem().string() +
                                     "' absent from groups file");
    }
    ds.validate();
    return ds;
}

void save_channel_csv(const ChannelSeries& series,
                      const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "timestamp,value,label\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld,%.10g,%d",
                      static_cast<long long>(series.timestamps[i]),
                      series.values[i], static_cast<int>(series.labels[i]));
        out << buf << '\n';
    }
}

void save_dataset(const MultiChannelDataset& dataset,
                  const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "channels");
    for (const auto& c : dataset.channels)
        save_channel_csv(c, dir / "channels" / (c.channel_id + ".csv"));
    std::ofstream out(dir / "groups.csv");
    out << "channel_id,group_id\n";
    for (const auto& [gid, members] : dataset.groups)
        for (const auto& cid : members) out << cid << ',' << gid << '\n';
}

std::vector<AnomalyEvent> load_events_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(file.string() + ": empty file");
    if (strip(line) != "channel_id,start,end")
        throw std::runtime_error(file.string() +
                                 ": expected header channel_id,start,end");
    std::vector<AnomalyEvent> events;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = strip(line);
        if (t.empty()) continue;
        auto fields = split_csv_line(t);
        const std::string where = file.string() + ":" + std::to_string(lineno);
        if (fields.size() != 3) throw std::runtime_error(where + ": bad row");
        AnomalyEvent ev;
        auto cid = strip(fields[0]);
        if (!cid.empty()) ev.channel_id = cid;
        ev.start = parse_int(fields[1], where);
        ev.end = parse_int(fields[2], where);
        if (ev.start > ev.end) throw std::runtime_error(where + ": start > end");
        events.push_back(ev);
    }
    return events;
}

void save_events_csv(const std::vector<AnomalyEvent>& events,
                     const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "channel_id,start,end\n";
    for (const auto& ev : events)
        out << ev.channel_id.value_or("") << ',' << ev.start << ',' << ev.end
            << '\n';
}

std::string file_digest(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::uint64_t h = 14695981039346656037ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace telem
