#pragma once
//
// Static organization model: cooperative robots, the relations between them,
// and the recursive team structure.
//
// A team node keeps its leader at children[0]. The leader of a team is the
// member with the largest organizing + communicating score (ties go to the
// lexicographically smallest id). A team's goal set is partitioned across its
// children. Every operation returns a new value; nothing is mutated in place.
//

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "teamcoop/error.hpp"

namespace teamcoop {

using GoalSet = std::set<std::string>;
using LabelSet = std::set<std::string>;
/// Indices into the relation list of the owning TeamStructure.
using RelationRefs = std::set<std::size_t>;

struct CapabilityProfile {
  static constexpr std::size_t kDimensions = 6;
  static constexpr std::array<std::string_view, kDimensions> kNames = {
      "moving", "acting", "sensing", "communicating", "organizing", "learning"};

  double moving = 0.0;
  double acting = 0.0;
  double sensing = 0.0;
  double communicating = 0.0;
  double organizing = 0.0;
  double learning = 0.0;

  static CapabilityProfile uniform(double score) {
    return {score, score, score, score, score, score};
  }

  std::array<double, kDimensions> values() const {
    return {moving, acting, sensing, communicating, organizing, learning};
  }

  static CapabilityProfile from_values(const std::array<double, kDimensions>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }

  bool valid() const {
    return std::ranges::all_of(values(), [](double s) { return s >= 0.0 && s <= 1.0; });
  }

  double leadership() const { return organizing + communicating; }

  bool operator==(const CapabilityProfile&) const = default;
};

struct CooperativeRobot {
  std::string id;
  CapabilityProfile capability;
  std::map<std::string, double> resources;
  std::set<std::string> interface;

  bool operator==(const CooperativeRobot&) const = default;
};

inline CooperativeRobot make_robot(std::string id, CapabilityProfile capability,
                                   std::map<std::string, double> resources = {},
                                   std::set<std::string> interface = {}) {
  if (id.empty()) throw Error(Errc::InvalidRobot, "robot id must be nonempty");
  if (!capability.valid()) {
    const auto v = capability.values();
    for (std::size_t d = 0; d < v.size(); ++d) {
      if (!(v[d] >= 0.0 && v[d] <= 1.0)) {
        throw Error(Errc::InvalidCapability, "robot '" + id + "': " + std::string(CapabilityProfile::kNames[d]) +
                                                 " = " + std::to_string(v[d]) + " outside [0,1]");
      }
    }
  }
  for (const auto& [name, qty] : resources) {
    if (!(qty >= 0.0)) throw Error(Errc::InvalidRobot, "robot '" + id + "': resource '" + name + "' is negative");
  }
  return {std::move(id), capability, std::move(resources), std::move(interface)};
}

/// Robots keyed by id. Ids are unique.
class Registry {
 public:
  Registry() = default;

  template <class Range>
  static Registry of(const Range& robots) {
    Registry r;
    for (const auto& robot : robots) r.add(robot);
    return r;
  }

  const CooperativeRobot& create_robot(std::string id, CapabilityProfile capability,
                                       std::map<std::string, double> resources = {},
                                       std::set<std::string> interface = {}) {
    return add(make_robot(std::move(id), capability, std::move(resources), std::move(interface)));
  }

  const CooperativeRobot& add(CooperativeRobot robot) {
    if (robots_.contains(robot.id)) throw Error(Errc::DuplicateId, "robot '" + robot.id + "' already registered");
    auto id = robot.id;
    return robots_.emplace(std::move(id), std::move(robot)).first->second;
  }

  const CooperativeRobot* find(std::string_view id) const {
    auto it = robots_.find(std::string(id));
    return it == robots_.end() ? nullptr : &it->second;
  }

  const CooperativeRobot& at(std::string_view id) const {
    if (const auto* r = find(id)) return *r;
    throw Error(Errc::InvalidRobot, "robot '" + std::string(id) + "' is not registered");
  }

  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return robots_.size(); }
  auto begin() const { return robots_.begin(); }
  auto end() const { return robots_.end(); }

 private:
  std::map<std::string, CooperativeRobot, std::less<>> robots_;
};

enum class RelationKind { VerticalControl, HorizontalCooperation };

struct Relation {
  RelationKind kind = RelationKind::HorizontalCooperation;
  std::string from;
  std::string to;

  bool operator==(const Relation&) const = default;
};

struct OrgNode;

/// Minimum unit of the structure: one robot with no sub-team.
struct Leaf {
  std::string robot_id;
  GoalSet goals;
  RelationRefs constraints;
  LabelSet rules;
  double benefit = 0.0;

  bool operator==(const Leaf&) const = default;
};

struct Team {
  std::string id_ros;
  std::string leader_robot_id;
  std::vector<OrgNode> children;
  GoalSet goals;
  CapabilityProfile capability_aggregate;
  RelationRefs constraints;
  LabelSet rules;
  double benefit = 0.0;
  std::size_t level = 0;
  std::size_t position = 0;

  bool operator==(const Team&) const;
};

struct OrgNode {
  std::variant<Leaf, Team> value;

  OrgNode(Leaf leaf) : value(std::move(leaf)) {}  // NOLINT(google-explicit-constructor)
  OrgNode(Team team) : value(std::move(team)) {}  // NOLINT(google-explicit-constructor)

  bool is_leaf() const { return std::holds_alternative<Leaf>(value); }
  bool is_team() const { return std::holds_alternative<Team>(value); }
  const Leaf& leaf() const { return std::get<Leaf>(value); }
  Leaf& leaf() { return std::get<Leaf>(value); }
  const Team& team() const { return std::get<Team>(value); }
  Team& team() { return std::get<Team>(value); }

  /// The robot standing for this node: the leaf's robot or the team leader.
  const std::string& head() const { return is_leaf() ? leaf().robot_id : team().leader_robot_id; }
  const GoalSet& goals() const { return is_leaf() ? leaf().goals : team().goals; }
  GoalSet& goals() { return is_leaf() ? leaf().goals : team().goals; }
  double benefit() const { return is_leaf() ? leaf().benefit : team().benefit; }

  /// All robot ids below this node, depth first, leader subtree first.
  std::vector<std::string> members() const {
    std::vector<std::string> out;
    collect(out);
    return out;
  }

  bool contains(std::string_view robot_id) const {
    if (is_leaf()) return leaf().robot_id == robot_id;
    return std::ranges::any_of(team().children, [&](const OrgNode& c) { return c.contains(robot_id); });
  }

  bool operator==(const OrgNode&) const = default;

 private:
  void collect(std::vector<std::string>& out) const {
    if (is_leaf()) {
      out.push_back(leaf().robot_id);
      return;
    }
    for (const auto& c : team().children) c.collect(out);
  }
};

inline bool Team::operator==(const Team& o) const {
  return id_ros == o.id_ros && leader_robot_id == o.leader_robot_id && children == o.children &&
         goals == o.goals && capability_aggregate == o.capability_aggregate && constraints == o.constraints &&
         rules == o.rules && benefit == o.benefit && level == o.level && position == o.position;
}

/// Result marker for a team whose last member left.
struct Dissolved {
  bool operator==(const Dissolved&) const = default;
};

using LeaveResult = std::variant<OrgNode, Dissolved>;

struct TeamStructure {
  Registry registry;
  std::vector<Relation> relations;
  OrgNode root;
};

struct Violation {
  std::string path;
  std::string what;

  bool operator==(const Violation&) const = default;
};

namespace detail {

/// Capability source for leader election: the registry plus at most one
/// robot that is not registered yet (the one being joined).
class CapabilityLookup {
 public:
  explicit CapabilityLookup(const Registry* registry, const CooperativeRobot* extra = nullptr)
      : registry_(registry), extra_(extra) {}

  const CapabilityProfile& operator()(std::string_view id) const {
    if (extra_ && extra_->id == id) return extra_->capability;
    if (registry_) return registry_->at(id).capability;
    throw Error(Errc::InvalidRobot, "robot '" + std::string(id) + "' is not registered");
  }

 private:
  const Registry* registry_;
  const CooperativeRobot* extra_;
};

/// True when robot `a` outranks robot `b` for leadership.
inline bool outranks(const CapabilityProfile& a, std::string_view a_id, const CapabilityProfile& b,
                     std::string_view b_id) {
  const double sa = a.leadership();
  const double sb = b.leadership();
  if (sa != sb) return sa > sb;
  return a_id < b_id;
}

inline CapabilityProfile aggregate(const std::vector<std::string>& members, const CapabilityLookup& lookup) {
  std::array<double, CapabilityProfile::kDimensions> best{};
  for (const auto& id : members) {
    const auto v = lookup(id).values();
    for (std::size_t d = 0; d < v.size(); ++d) best[d] = std::max(best[d], v[d]);
  }
  return CapabilityProfile::from_values(best);
}

/// Moves the child holding the strongest member to the front (stable for the
/// others), then refreshes leader id and capability aggregate. Children are
/// assumed internally consistent, so each child's head is its best member.
inline void reelect(Team& team, const CapabilityLookup& lookup) {
  auto& kids = team.children;
  std::size_t best = 0;
  for (std::size_t k = 1; k < kids.size(); ++k) {
    if (outranks(lookup(kids[k].head()), kids[k].head(), lookup(kids[best].head()), kids[best].head())) best = k;
  }
  std::rotate(kids.begin(), kids.begin() + static_cast<std::ptrdiff_t>(best),
              kids.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  team.leader_robot_id = kids.front().head();
  std::vector<std::string> members;
  for (const auto& k : kids) {
    auto m = k.members();
    members.insert(members.end(), m.begin(), m.end());
  }
  team.capability_aggregate = aggregate(members, lookup);
}

/// Replaces a node's goals. Inside a sub-team the whole set goes down the
/// leader chain and the other children are cleared.
inline void assign_goals(OrgNode& node, GoalSet goals) {
  if (node.is_leaf()) {
    node.leaf().goals = std::move(goals);
    return;
  }
  auto& team = node.team();
  team.goals = goals;
  for (std::size_t k = 1; k < team.children.size(); ++k) assign_goals(team.children[k], {});
  assign_goals(team.children.front(), std::move(goals));
}

/// Adds goals to a node and to its leader chain.
inline void absorb_goals(OrgNode& node, const GoalSet& goals) {
  node.goals().insert(goals.begin(), goals.end());
  if (node.is_team()) absorb_goals(node.team().children.front(), goals);
}

inline void relevel(Team& team, std::size_t level) {
  team.level = level;
  for (auto& c : team.children) {
    if (c.is_team()) relevel(c.team(), level + 1);
  }
}

inline const Team& require_team(const OrgNode& node) {
  if (!node.is_team()) throw Error(Errc::NotATeam, "node for robot '" + node.head() + "' is a leaf");
  return node.team();
}

inline LeaveResult leave_impl(const OrgNode& node, std::string_view robot_id, const CapabilityLookup& lookup) {
  if (node.is_leaf()) {
    if (node.leaf().robot_id == robot_id) return Dissolved{};
    return node;
  }
  Team team = node.team();
  GoalSet orphaned;
  for (std::size_t k = 0; k < team.children.size(); ++k) {
    if (!team.children[k].contains(robot_id)) continue;
    auto result = leave_impl(team.children[k], robot_id, lookup);
    if (std::holds_alternative<Dissolved>(result)) {
      orphaned = team.children[k].goals();
      team.children.erase(team.children.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      team.children[k] = std::get<OrgNode>(std::move(result));
    }
    break;
  }
  if (team.children.empty()) return Dissolved{};
  reelect(team, lookup);
  OrgNode out{std::move(team)};
  if (!orphaned.empty()) absorb_goals(out.team().children.front(), orphaned);
  return out;
}

}  // namespace detail

/// Elects the leader among `robots`: largest organizing + communicating,
/// ties to the smallest id.
inline const CooperativeRobot& elect_leader(std::span<const CooperativeRobot> robots) {
  if (robots.empty()) throw Error(Errc::EmptyTeam, "cannot elect a leader among zero robots");
  const CooperativeRobot* best = &robots.front();
  for (const auto& r : robots.subspan(1)) {
    if (detail::outranks(r.capability, r.id, best->capability, best->id)) best = &r;
  }
  return *best;
}

/// Forms a flat team. The leader's leaf comes first and initially holds all
/// goals; the other members keep their input order with empty goal sets.
inline OrgNode form_team(std::span<const CooperativeRobot> robots, GoalSet goals, std::size_t level,
                         std::size_t position, std::string id_ros = {}) {
  if (robots.empty()) throw Error(Errc::EmptyTeam, "a team needs at least one robot");
  if (goals.empty()) throw Error(Errc::InvalidPartition, "a team needs at least one goal");
  std::set<std::string_view> seen;
  for (const auto& r : robots) {
    if (!r.capability.valid()) throw Error(Errc::InvalidCapability, "robot '" + r.id + "' has a score outside [0,1]");
    if (!seen.insert(r.id).second) throw Error(Errc::DuplicateId, "robot '" + r.id + "' listed twice");
  }

  Registry local = Registry::of(robots);
  const detail::CapabilityLookup lookup(&local);

  Team team;
  team.id_ros = id_ros.empty() ? "ros(" + std::to_string(level) + "," + std::to_string(position) + ")" : std::move(id_ros);
  team.level = level;
  team.position = position;
  team.goals = goals;
  for (const auto& r : robots) team.children.emplace_back(Leaf{r.id, {}, {}, {}, 0.0});
  detail::reelect(team, lookup);
  team.children.front().leaf().goals = std::move(goals);
  return team;
}

/// Adds `robot` as a new leaf (with no goals) and re-elects the leader.
/// Existing members are looked up in `registry`; `robot` itself need not be.
inline OrgNode join(const Registry& registry, const OrgNode& node, const CooperativeRobot& robot) {
  Team team = detail::require_team(node);
  if (node.contains(robot.id)) throw Error(Errc::AlreadyMember, "robot '" + robot.id + "' is already in " + team.id_ros);
  if (!robot.capability.valid()) throw Error(Errc::InvalidCapability, "robot '" + robot.id + "' has a score outside [0,1]");
  team.children.emplace_back(Leaf{robot.id, {}, {}, {}, 0.0});
  detail::reelect(team, detail::CapabilityLookup(&registry, &robot));
  return team;
}

/// Removes a member anywhere in the subtree. Its goals pass to the leader
/// chain of the team it left; an emptied sub-team is dropped the same way.
inline LeaveResult leave(const Registry& registry, const OrgNode& node, std::string_view robot_id) {
  if (!node.contains(robot_id)) throw Error(Errc::NotAMember, "robot '" + std::string(robot_id) + "' is not a member");
  return detail::leave_impl(node, robot_id, detail::CapabilityLookup(&registry));
}

/// Attaches a formed sub-team as a child one level down and re-elects.
/// The sub-team's goals join the parent's goal set and must be new to it.
inline OrgNode attach_subteam(const Registry& registry, const OrgNode& node, OrgNode subteam) {
  Team team = detail::require_team(node);
  detail::require_team(subteam);
  for (const auto& id : subteam.members()) {
    if (node.contains(id)) throw Error(Errc::AlreadyMember, "robot '" + id + "' is already in " + team.id_ros);
  }
  for (const auto& g : subteam.goals()) {
    if (team.goals.contains(g)) throw Error(Errc::InvalidPartition, "goal '" + g + "' already belongs to " + team.id_ros);
  }
  detail::relevel(subteam.team(), team.level + 1);
  team.goals.insert(subteam.goals().begin(), subteam.goals().end());
  team.children.push_back(std::move(subteam));
  detail::reelect(team, detail::CapabilityLookup(&registry));
  return team;
}

/// Replaces each child's goal set with its assigned subset. The subsets must
/// partition the team's goals and every child must be assigned.
inline OrgNode decompose_goal(const OrgNode& node, const std::map<std::size_t, GoalSet>& assignment) {
  Team team = detail::require_team(node);
  for (const auto& [idx, _] : assignment) {
    if (idx >= team.children.size()) {
      throw Error(Errc::InvalidPartition, "child index " + std::to_string(idx) + " out of range");
    }
  }
  GoalSet covered;
  for (std::size_t k = 0; k < team.children.size(); ++k) {
    auto it = assignment.find(k);
    if (it == assignment.end()) throw Error(Errc::InvalidPartition, "child " + std::to_string(k) + " has no assignment");
    for (const auto& g : it->second) {
      if (!team.goals.contains(g)) throw Error(Errc::InvalidPartition, "goal '" + g + "' is not a goal of " + team.id_ros);
      if (!covered.insert(g).second) throw Error(Errc::InvalidPartition, "goal '" + g + "' assigned twice");
    }
  }
  for (const auto& g : team.goals) {
    if (!covered.contains(g)) throw Error(Errc::InvalidPartition, "goal '" + g + "' is unassigned");
  }
  for (std::size_t k = 0; k < team.children.size(); ++k) detail::assign_goals(team.children[k], assignment.at(k));
  return team;
}

namespace detail {

class Validator {
 public:
  Validator(const Registry& registry, std::span<const Relation> relations)
      : registry_(registry), relations_(relations) {}

  std::vector<Violation> run(const OrgNode& root) {
    std::size_t r = 0;
    for (const auto& [id, robot] : registry_) {
      const std::string path = "registry[" + id + "]";
      if (robot.id != id) add(path, "robot id '" + robot.id + "' does not match its key");
      if (!robot.capability.valid()) add(path, "capability score outside [0,1]");
      for (const auto& [name, qty] : robot.resources) {
        if (!(qty >= 0.0)) add(path, "resource '" + name + "' is negative");
      }
    }
    for (const auto& rel : relations_) {
      const std::string path = "relations[" + std::to_string(r++) + "]";
      if (rel.from == rel.to) add(path, "relation from a robot to itself ('" + rel.from + "')");
      if (!registry_.contains(rel.from)) add(path, "unknown endpoint '" + rel.from + "'");
      if (!registry_.contains(rel.to)) add(path, "unknown endpoint '" + rel.to + "'");
    }
    node(root, "root", std::nullopt);
    for (const auto& [id, count] : seen_) {
      if (count > 1) add("root", "robot '" + id + "' appears " + std::to_string(count) + " times");
    }
    return std::move(out_);
  }

 private:
  void add(std::string path, std::string what) { out_.push_back({std::move(path), std::move(what)}); }

  void refs(const RelationRefs& constraints, const std::string& path) {
    for (auto idx : constraints) {
      if (idx >= relations_.size()) add(path, "constraint refers to missing relation " + std::to_string(idx));
    }
  }

  void node(const OrgNode& n, const std::string& path, std::optional<std::size_t> parent_level) {
    if (n.is_leaf()) {
      const auto& leaf = n.leaf();
      ++seen_[leaf.robot_id];
      if (!registry_.contains(leaf.robot_id)) add(path, "robot '" + leaf.robot_id + "' is not registered");
      refs(leaf.constraints, path);
      return;
    }
    const auto& team = n.team();
    const std::string here = path + "(" + team.id_ros + ")";
    refs(team.constraints, here);
    if (!parent_level && team.level != 0) add(here, "root team has level " + std::to_string(team.level) + ", expected 0");
    if (parent_level && team.level != *parent_level + 1) {
      add(here, "level " + std::to_string(team.level) + " is not parent level + 1 (" +
                    std::to_string(*parent_level + 1) + ")");
    }
    if (team.children.empty()) {
      add(here, "team has no children");
      return;
    }
    if (team.children.front().head() != team.leader_robot_id) {
      add(here, "leader '" + team.leader_robot_id + "' is not at children[0] (found '" + team.children.front().head() + "')");
    }

    const auto members = n.members();
    const bool all_known = std::ranges::all_of(members, [&](const auto& id) { return registry_.contains(id); });
    if (all_known) {
      const CapabilityLookup lookup(&registry_);
      const std::string* best = &members.front();
      for (const auto& id : members) {
        if (outranks(lookup(id), id, lookup(*best), *best)) best = &id;
      }
      if (*best != team.leader_robot_id) {
        add(here, "leader '" + team.leader_robot_id + "' is not the strongest organizer; expected '" + *best + "'");
      }
      if (aggregate(members, lookup) != team.capability_aggregate) {
        add(here, "capability aggregate is not the per-dimension maximum over members");
      }
    }

    GoalSet united;
    for (const auto& c : team.children) {
      for (const auto& g : c.goals()) {
        if (!united.insert(g).second) add(here, "goal '" + g + "' held by more than one child");
      }
    }
    if (united != team.goals) add(here, "children's goals do not add up to the team's goals");

    for (std::size_t k = 0; k < team.children.size(); ++k) {
      node(team.children[k], here + "/" + std::to_string(k), team.level);
    }
  }

  const Registry& registry_;
  std::span<const Relation> relations_;
  std::map<std::string, int> seen_;
  std::vector<Violation> out_;
};

}  // namespace detail

/// Checks every structural invariant; an empty result means the structure is valid.
inline std::vector<Violation> validate(const Registry& registry, std::span<const Relation> relations,
                                       const OrgNode& root) {
  return detail::Validator(registry, relations).run(root);
}

inline std::vector<Violation> validate(const TeamStructure& s) { return validate(s.registry, s.relations, s.root); }

}  // namespace teamcoop
