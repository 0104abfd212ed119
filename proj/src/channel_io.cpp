#include "pcgame/channel_io.hpp"

#include <fstream>
#include <sstream>

#include "pcgame/error.hpp"

namespace pcgame {

namespace {

using nlohmann::json;

std::size_t read_count(const json& doc, const char* field) {
  if (!doc.contains(field)) throw FormatError(std::string("missing field '") + field + "'");
  const auto& v = doc.at(field);
  if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
    throw FormatError(std::string("field '") + field + "': expected a positive integer");
  return v.get<std::size_t>();
}

const json& expect_array(const json& v, const std::string& path, std::size_t size) {
  if (!v.is_array())
    throw FormatError("field '" + path + "': expected an array of length " + std::to_string(size));
  if (v.size() != size)
    throw FormatError("field '" + path + "': expected length " + std::to_string(size) + ", got " +
                      std::to_string(v.size()));
  return v;
}

double expect_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw FormatError("field '" + path + "': expected a number");
  return v.get<double>();
}

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

}  // namespace

json channel_to_json(const ChannelRealization& ch) {
  const std::size_t users = ch.num_users();
  const std::size_t bins = ch.num_bins();
  json gain = json::array();
  for (std::size_t j = 0; j < users; ++j) {
    json row = json::array();
    for (std::size_t k = 0; k < users; ++k) {
      json cell = json::array();
      for (std::size_t f = 0; f < bins; ++f) cell.push_back(ch.gain(j, k, f));
      row.push_back(std::move(cell));
    }
    gain.push_back(std::move(row));
  }
  json noise = json::array();
  for (std::size_t k = 0; k < users; ++k) {
    json cell = json::array();
    for (std::size_t f = 0; f < bins; ++f) cell.push_back(ch.noise(k, f));
    noise.push_back(std::move(cell));
  }
  return json{{"num_users", users}, {"num_bins", bins}, {"gain", gain}, {"noise", noise}};
}

ChannelRealization channel_from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("channel document must be a JSON object");
  const std::size_t users = read_count(doc, "num_users");
  const std::size_t bins = read_count(doc, "num_bins");
  for (const char* field : {"gain", "noise"})
    if (!doc.contains(field)) throw FormatError(std::string("missing field '") + field + "'");

  std::vector<double> gain;
  gain.reserve(users * users * bins);
  const auto& g = expect_array(doc.at("gain"), "gain", users);
  for (std::size_t j = 0; j < users; ++j) {
    const auto pj = index_path("gain", j);
    const auto& row = expect_array(g[j], pj, users);
    for (std::size_t k = 0; k < users; ++k) {
      const auto pk = index_path(pj, k);
      const auto& cell = expect_array(row[k], pk, bins);
      for (std::size_t f = 0; f < bins; ++f) {
        const auto pf = index_path(pk, f);
        const double v = expect_number(cell[f], pf);
        if (!(v >= 0.0)) throw FormatError("field '" + pf + "': gain must be >= 0");
        if (j == k && !(v > 0.0)) throw FormatError("field '" + pf + "': direct gain must be > 0");
        gain.push_back(v);
      }
    }
  }

  std::vector<double> noise;
  noise.reserve(users * bins);
  const auto& n = expect_array(doc.at("noise"), "noise", users);
  for (std::size_t k = 0; k < users; ++k) {
    const auto pk = index_path("noise", k);
    const auto& cell = expect_array(n[k], pk, bins);
    for (std::size_t f = 0; f < bins; ++f) {
      const auto pf = index_path(pk, f);
      const double v = expect_number(cell[f], pf);
      if (!(v > 0.0)) throw FormatError("field '" + pf + "': noise must be > 0");
      noise.push_back(v);
    }
  }
  return ChannelRealization(users, bins, std::move(gain), std::move(noise));
}

ChannelRealization parse_channel(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line:column.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw FormatError("JSON syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(col));
  }
  return channel_from_json(doc);
}

ChannelRealization read_channel_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open channel file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_channel(buf.str());
}

void write_channel_file(const std::filesystem::path& path, const ChannelRealization& ch) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write channel file '" + path.string() + "'");
  out << channel_to_json(ch).dump(2) << '\n';
}

}  // namespace pcgame
