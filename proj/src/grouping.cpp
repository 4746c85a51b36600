#include "hmpt/grouping.hpp"

#include <algorithm>
#include <set>

#include "hmpt/error.hpp"
#include "json_io.hpp"

namespace hmpt {

void GroupingConfig::validate() const {
  if (top_k < 1) throw DataError("top_k must be at least 1");
}

std::vector<AliasedSite> alias_sites(const TraceBundle& bundle) {
  std::map<SiteId, std::vector<AllocationEvent>> by_site;
  for (const auto& e : bundle.events) by_site[e.site].push_back(e);

  const std::uint64_t total_samples = bundle.samples.size();
  std::vector<AliasedSite> out;
  out.reserve(by_site.size());
  for (const auto& [site, events] : by_site) {
    AliasedSite a;
    a.site = site;
    a.total_bytes = peak_live_bytes(events);
    if (total_samples > 0) {
      auto it = bundle.sample_hits.find(site);
      const std::uint64_t hits = it == bundle.sample_hits.end() ? 0 : it->second;
      a.sample_share = static_cast<double>(hits) / static_cast<double>(total_samples);
    }
    out.push_back(a);
  }
  return out;
}

namespace {

AllocationGroup make_group(GroupId id, const std::vector<const AliasedSite*>& members) {
  AllocationGroup g;
  g.id = id;
  for (const auto* m : members) {
    g.member_sites.push_back(m->site);
    g.total_bytes += m->total_bytes;
    g.sample_share += m->sample_share;
  }
  std::sort(g.member_sites.begin(), g.member_sites.end());
  return g;
}

std::vector<AllocationGroup> form_groups_from(GroupId first_id, std::vector<const AliasedSite*> sites,
                                              const GroupingConfig& cfg) {
  auto score = [&](const AliasedSite* s) {
    if (cfg.impact_scores) {
      auto it = cfg.impact_scores->find(s->site);
      return it == cfg.impact_scores->end() ? 0.0 : it->second;
    }
    return s->sample_share * static_cast<double>(s->total_bytes);
  };

  std::vector<const AliasedSite*> candidates;
  std::vector<const AliasedSite*> rest;
  for (const auto* s : sites) {
    (s->total_bytes < cfg.size_threshold ? rest : candidates).push_back(s);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](const AliasedSite* a, const AliasedSite* b) {
    const double sa = score(a);
    const double sb = score(b);
    if (sa != sb) return sa > sb;
    return a->site < b->site;
  });
  if (candidates.size() > cfg.top_k) {
    rest.insert(rest.end(), candidates.begin() + static_cast<std::ptrdiff_t>(cfg.top_k), candidates.end());
    candidates.resize(cfg.top_k);
  }

  std::vector<AllocationGroup> groups;
  GroupId id = first_id;
  for (const auto* s : candidates) groups.push_back(make_group(id++, {s}));
  if (!rest.empty()) {
    auto g = make_group(id, rest);
    g.is_rest_group = true;
    g.name = "rest";
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace

std::vector<AllocationGroup> form_groups(const std::vector<AliasedSite>& aliased, const GroupingConfig& cfg) {
  cfg.validate();
  if (aliased.empty()) throw DataError("no captured allocations");
  std::vector<const AliasedSite*> sites;
  for (const auto& a : aliased) sites.push_back(&a);
  return form_groups_from(0, std::move(sites), cfg);
}

std::vector<AllocationGroup> apply_manual_rules(const std::vector<AliasedSite>& aliased,
                                                const std::vector<GroupingRule>& rules,
                                                const GroupingConfig& cfg) {
  cfg.validate();
  if (aliased.empty()) throw DataError("no captured allocations");
  std::map<SiteId, const AliasedSite*> index;
  for (const auto& a : aliased) index[a.site] = &a;

  std::set<SiteId> claimed;
  std::vector<AllocationGroup> groups;
  for (const auto& rule : rules) {
    std::vector<const AliasedSite*> members;
    for (SiteId s : rule.sites) {
      auto it = index.find(s);
      if (it == index.end()) throw DataError("rule '" + rule.name + "' references unknown site " + format_hex(s));
      if (!claimed.insert(s).second) throw DataError("overlapping rules at site " + format_hex(s));
      members.push_back(it->second);
    }
    if (members.empty()) throw DataError("rule '" + rule.name + "' has no sites");
    auto g = make_group(static_cast<GroupId>(groups.size()), members);
    g.name = rule.name;
    groups.push_back(std::move(g));
  }

  std::vector<const AliasedSite*> remaining;
  for (const auto& a : aliased) {
    if (!claimed.contains(a.site)) remaining.push_back(&a);
  }
  if (!remaining.empty()) {
    auto tail = form_groups_from(static_cast<GroupId>(groups.size()), std::move(remaining), cfg);
    groups.insert(groups.end(), tail.begin(), tail.end());
  }
  return groups;
}

std::vector<AllocationGroup> group_allocations(const std::vector<AliasedSite>& aliased, const GroupingConfig& cfg) {
  if (cfg.manual_rules.empty()) return form_groups(aliased, cfg);
  return apply_manual_rules(aliased, cfg.manual_rules, cfg);
}

std::vector<GroupingRule> parse_rules(const std::string& json_text) {
  const auto doc = detail::parse_json(json_text, "rules file");
  if (!doc.is_array()) throw DataError("rules file must be a JSON array");
  return detail::guarded("rules file", [&] {
    std::vector<GroupingRule> rules;
    for (const auto& item : doc) {
      if (!item.is_object() || !item.contains("name") || !item.contains("sites")) {
        throw DataError("rules file: each rule needs \"name\" and \"sites\"");
      }
      GroupingRule r;
      r.name = item.at("name").get<std::string>();
      for (const auto& s : item.at("sites")) {
        auto id = parse_hex(s.get<std::string>());
        if (!id) throw DataError("rules file: bad site id '" + s.get<std::string>() + "'");
        r.sites.push_back(*id);
      }
      rules.push_back(std::move(r));
    }
    return rules;
  });
}

std::vector<GroupingRule> load_rules(const std::string& path) {
  return parse_rules(detail::read_file(path, "rules file"));
}

}  // namespace hmpt
