#include "hmpt/configspace.hpp"
#include "json_io.hpp"

namespace hmpt {

using detail::json;

std::string space_to_json(const ConfigurationSpace& space) {
  json pools = json::array();
  for (const auto& p : space.pools) pools.push_back(detail::pool_to_json(p));
  json groups = json::array();
  for (const auto& g : space.groups) {
    json sites = json::array();
    for (SiteId s : g.member_sites) sites.push_back(format_hex(s));
    groups.push_back({{"id", g.id},
                      {"name", g.name},
                      {"sites", sites},
                      {"total_bytes", g.total_bytes},
                      {"sample_share", g.sample_share},
                      {"rest", g.is_rest_group}});
  }
  json doc{{"version", 1}, {"pools", pools}, {"groups", groups}};
  return doc.dump(2) + "\n";
}

ConfigurationSpace parse_space(const std::string& json_text) {
  const json doc = detail::parse_json(json_text, "space file");
  auto [groups, pools] = detail::guarded("space file", [&] {
    if (doc.value("version", 1) != 1) throw DataError("space file: unsupported version");
    std::vector<AllocationGroup> gs;
    std::vector<MemoryPoolDescriptor> ps;
    for (const auto& p : doc.at("pools")) ps.push_back(detail::pool_from_json(p));
    for (const auto& g : doc.at("groups")) {
      AllocationGroup group;
      group.id = g.at("id").get<GroupId>();
      group.name = g.value("name", std::string{});
      for (const auto& s : g.at("sites")) {
        auto id = parse_hex(s.get<std::string>());
        if (!id) throw DataError("space file: bad site id '" + s.get<std::string>() + "'");
        group.member_sites.push_back(*id);
      }
      group.total_bytes = g.at("total_bytes").get<std::uint64_t>();
      group.sample_share = g.value("sample_share", 0.0);
      group.is_rest_group = g.value("rest", false);
      gs.push_back(std::move(group));
    }
    return std::pair{std::move(gs), std::move(ps)};
  });
  return enumerate_placements(std::move(groups), std::move(pools));
}

ConfigurationSpace load_space(const std::string& path) { return parse_space(detail::read_file(path, "space file")); }

void save_space(const std::string& path, const ConfigurationSpace& space) {
  detail::write_file(path, space_to_json(space));
}

}  // namespace hmpt
