#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pcgame/channel.hpp"

namespace pcgame {

// Document layout: {"num_users", "num_bins", "gain": [j][k][f], "noise": [k][f]}.
// Doubles are written in shortest round-trip form, so write/read is bit-exact.
nlohmann::json channel_to_json(const ChannelRealization& ch);

// Throws FormatError naming the offending field, e.g. "gain[0][1][3]".
ChannelRealization channel_from_json(const nlohmann::json& doc);

// Parses text; syntax errors are reported with line and column.
ChannelRealization parse_channel(const std::string& text);

ChannelRealization read_channel_file(const std::filesystem::path& path);
void write_channel_file(const std::filesystem::path& path, const ChannelRealization& ch);

}  // namespace pcgame
