#include "mobisynth/identity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "mobisynth/errors.hpp"
#include "mobisynth/fs.hpp"
#include "mobisynth/rng.hpp"

namespace mobisynth {

namespace {

using json = nlohmann::ordered_json;

constexpr double kRowTol = 1e-9;

// Sub-stream ids under the user seed.
enum : std::uint64_t { kStreamHome = 0, kStreamWeekday = 1, kStreamWeekend = 2 };

std::vector<const Poi*> candidates(const std::vector<Poi>& pois, PoiKind kind) {
    std::vector<const Poi*> out;
    for (const Poi& p : pois)
        if (p.kind == kind) out.push_back(&p);
    return out;
}

const Poi& draw_candidate(const std::vector<Poi>& pois, PoiKind kind, Rng& rng,
                          std::string_view role) {
    std::vector<const Poi*> cs = candidates(pois, kind);
    if (cs.empty())
        throw DomainError("no " + std::string(to_string(kind)) +
                          " candidates for state " + std::string(role));
    return *cs[rng.index(cs.size())];
}

int draw_frequency(int lo, int hi, Rng& rng) {
    if (lo < 1 || hi < lo) throw DomainError("frequency bounds must satisfy 1 <= l <= u");
    return lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1)));
}

Identity build_machine(const std::vector<Poi>& pois, const IdentityConfig& cfg,
                       const MachineConfig& mc, const GeoPoint& home, bool weekday,
                       std::uint64_t user_seed, std::uint64_t stream) {
    Rng rng(mix_seed(user_seed, stream));

    Identity id;
    id.weekday = weekday;
    id.seed = user_seed;

    const Poi& anchor = draw_candidate(pois, mc.anchor_poi_kind, rng, mc.anchor_label);

    StateSpec home_state;
    home_state.id = 0;
    home_state.label = "Home";
    home_state.kind = StateKind::significant;
    home_state.location = home;
    home_state.t_min_s = cfg.home_t_min_s;
    home_state.next_significant = 1;

    // The anchor is represented as two states sharing its location: the
    // afternoon half receives the arrival window, the halves split the dwell.
    StateSpec anchor_a;
    anchor_a.id = 1;
    anchor_a.label = mc.anchor_label + " (afternoon)";
    anchor_a.kind = StateKind::significant;
    anchor_a.location = anchor.location;
    anchor_a.t_min_s = mc.anchor_t_min_s / 2.0;
    anchor_a.arrival_earliest_s = mc.anchor_arrival_earliest_s;
    anchor_a.arrival_latest_s = mc.anchor_arrival_latest_s;
    anchor_a.next_significant = 2;

    StateSpec anchor_e;
    anchor_e.id = 2;
    anchor_e.label = mc.anchor_label + " (evening)";
    anchor_e.kind = StateKind::significant;
    anchor_e.location = anchor.location;
    anchor_e.t_min_s = mc.anchor_t_min_s / 2.0;
    anchor_e.next_significant = 0;

    id.states = {home_state, anchor_a, anchor_e};

    // Which transitional entries participate: all, or a drawn subset kept in
    // catalogue order.
    std::vector<std::size_t> picks(mc.transitional.size());
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    if (mc.n_transitional >= 0 &&
        static_cast<std::size_t>(mc.n_transitional) < picks.size()) {
        rng.shuffle(picks);
        picks.resize(static_cast<std::size_t>(mc.n_transitional));
        std::sort(picks.begin(), picks.end());
    }

    for (std::size_t pick : picks) {
        const TransitionalConfig& tc = mc.transitional[pick];
        std::vector<const Poi*> cs = candidates(pois, tc.poi_kind);
        if (cs.empty())
            throw DomainError("no " + std::string(to_string(tc.poi_kind)) +
                              " candidates for state " + tc.label);
        const Poi* best = cs.front();
        double best_d = haversine_distance(best->location, home) +
                        haversine_distance(best->location, anchor.location);
        for (const Poi* c : cs) {
            double d = haversine_distance(c->location, home) +
                       haversine_distance(c->location, anchor.location);
            if (d < best_d) {
                best = c;
                best_d = d;
            }
        }

        int f;
        if (tc.frequency_from_fuel) {
            double m = rng.uniform(cfg.mileage_lo, cfg.mileage_hi);
            double c = rng.uniform(cfg.tank_lo, cfg.tank_hi);
            f = gas_frequency(m, c, home, anchor.location);
        } else {
            f = draw_frequency(tc.freq_lo, tc.freq_hi, rng);
        }

        StateSpec s;
        s.id = static_cast<int>(id.states.size());
        s.label = tc.label;
        s.kind = StateKind::transitional;
        s.location = best->location;
        s.t_min_s = tc.t_min_s;
        s.arrival_earliest_s = tc.arrival_earliest_s;
        s.arrival_latest_s = tc.arrival_latest_s;
        s.frequency_days = f;
        s.occurrence_prob = 1.0 / static_cast<double>(f);
        switch (tc.leg) {
            case Leg::morning:
                s.origin_state = 0;
                s.destination_state = 1;
                break;
            case Leg::midday:
                s.origin_state = 1;
                s.destination_state = 2;
                break;
            case Leg::evening:
                s.origin_state = 2;
                s.destination_state = 0;
                break;
        }
        id.states.push_back(std::move(s));
    }

    id.transitions = build_transitions(id.states);
    return id;
}

json state_to_json(const StateSpec& s) {
    return json{{"id", s.id},
                {"label", s.label},
                {"kind", s.kind == StateKind::significant ? "significant" : "transitional"},
                {"lat", s.location.lat},
                {"lon", s.location.lon},
                {"t_min_s", s.t_min_s},
                {"arrival_earliest_s", s.arrival_earliest_s},
                {"arrival_latest_s", s.arrival_latest_s},
                {"frequency_days", s.frequency_days},
                {"occurrence_prob", s.occurrence_prob},
                {"next_significant", s.next_significant},
                {"origin_state", s.origin_state},
                {"destination_state", s.destination_state}};
}

StateSpec state_from_json(const json& j) {
    StateSpec s;
    s.id = j.at("id").get<int>();
    s.label = j.at("label").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "significant") s.kind = StateKind::significant;
    else if (kind == "transitional") s.kind = StateKind::transitional;
    else throw DomainError("unknown state kind " + kind);
    s.location = GeoPoint{j.at("lat").get<double>(), j.at("lon").get<double>()};
    s.t_min_s = j.at("t_min_s").get<double>();
    s.arrival_earliest_s = j.at("arrival_earliest_s").get<double>();
    s.arrival_latest_s = j.at("arrival_latest_s").get<double>();
    s.frequency_days = j.at("frequency_days").get<int>();
    s.occurrence_prob = j.at("occurrence_prob").get<double>();
    s.next_significant = j.at("next_significant").get<int>();
    s.origin_state = j.at("origin_state").get<int>();
    s.destination_state = j.at("destination_state").get<int>();
    return s;
}

json machine_to_json(const Identity& id) {
    json states = json::array();
    for (const StateSpec& s : id.states) states.push_back(state_to_json(s));
    return json{{"states", std::move(states)}, {"transitions", id.transitions}};
}

Identity machine_from_json(const json& j, bool weekday, std::uint64_t seed) {
    Identity id;
    id.weekday = weekday;
    id.seed = seed;
    for (const json& js : j.at("states")) id.states.push_back(state_from_json(js));
    id.transitions = j.at("transitions").get<std::vector<std::vector<double>>>();
    validate_identity(id);
    return id;
}

}  // namespace

IdentityConfig default_identity_config() {
    IdentityConfig cfg;

    MachineConfig& wd = cfg.weekday;
    wd.anchor_label = "Work";
    wd.anchor_poi_kind = PoiKind::work;
    wd.anchor_t_min_s = 28800.0;
    wd.anchor_arrival_earliest_s = 28800.0;  // 8:00
    wd.anchor_arrival_latest_s = 32400.0;    // 9:00
    wd.transitional = {
        {"School", PoiKind::school, Leg::morning, 3, 7, false, 300.0, 21600.0, 30600.0},
        {"Gas Station", PoiKind::gas_station, Leg::morning, 2, 30, true, 300.0, 0.0, 86399.0},
        {"Lunch", PoiKind::restaurant, Leg::midday, 2, 8, false, 1800.0, 39600.0, 50400.0},
        {"Dinner", PoiKind::restaurant, Leg::evening, 3, 10, false, 1800.0, 61200.0, 75600.0},
    };

    MachineConfig& we = cfg.weekend;
    we.anchor_label = "Cinema";
    we.anchor_poi_kind = PoiKind::cinema;
    we.anchor_t_min_s = 7200.0;
    we.anchor_arrival_earliest_s = 46800.0;  // 13:00
    we.anchor_arrival_latest_s = 61200.0;    // 17:00
    we.transitional = {
        {"Restaurant", PoiKind::restaurant, Leg::evening, 1, 3, false, 1800.0, 61200.0, 79200.0},
    };

    return cfg;
}

int gas_frequency(double m_km_per_liter, double c_liters, const GeoPoint& home,
                  const GeoPoint& work) {
    if (m_km_per_liter <= 0.0 || c_liters <= 0.0)
        throw DomainError("mileage and tank capacity must be positive");
    double roundtrip_m = 2.0 * haversine_distance(home, work);
    if (roundtrip_m <= 0.0) throw DomainError("home and work coincide; round trip is zero");
    double range_m = 0.75 * m_km_per_liter * c_liters * 1000.0;
    int f = static_cast<int>(range_m / roundtrip_m);
    return f < 1 ? 1 : f;
}

std::vector<std::vector<double>> build_transitions(
    const std::vector<StateSpec>& states, std::vector<std::string>* warnings) {
    const std::size_t n = states.size();
    std::size_t significant = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const StateSpec& s = states[i];
        if (s.id != static_cast<int>(i))
            throw DomainError("state ids must match their positions");
        if (s.kind == StateKind::significant) {
            ++significant;
            if (s.next_significant < 0 || s.next_significant >= static_cast<int>(n) ||
                states[static_cast<std::size_t>(s.next_significant)].kind !=
                    StateKind::significant)
                throw DomainError("significant state " + s.label +
                                  " lacks a significant successor");
        } else {
            auto check = [&](int ref, const char* role) {
                if (ref < 0 || ref >= static_cast<int>(n) ||
                    states[static_cast<std::size_t>(ref)].kind != StateKind::significant)
                    throw DomainError("transitional state " + s.label +
                                      " lacks a significant " + role);
            };
            check(s.origin_state, "origin");
            check(s.destination_state, "destination");
        }
    }
    if (significant < 2)
        throw DomainError("a machine needs at least two significant states");

    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));

    for (std::size_t j = 0; j < n; ++j) {
        const StateSpec& sj = states[j];
        if (sj.kind != StateKind::transitional) continue;
        // Condition 1: leg origin feeds the transitional state.
        m[static_cast<std::size_t>(sj.origin_state)][j] = sj.occurrence_prob;
        // Condition 2: the transitional state feeds its leg destination.
        m[j][static_cast<std::size_t>(sj.destination_state)] = sj.occurrence_prob;
    }

    // Condition 3: same-leg chains ordered by distance from the leg origin.
    for (std::size_t i = 0; i < n; ++i) {
        if (states[i].kind != StateKind::transitional) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || states[j].kind != StateKind::transitional) continue;
            if (states[i].origin_state != states[j].origin_state) continue;
            const GeoPoint& origin =
                states[static_cast<std::size_t>(states[i].origin_state)].location;
            if (haversine_distance(origin, states[i].location) <
                haversine_distance(origin, states[j].location))
                m[i][j] = states[i].occurrence_prob * states[j].occurrence_prob;
        }
    }

    // Significant rows: the remaining mass goes to the next significant state.
    for (std::size_t i = 0; i < n; ++i) {
        if (states[i].kind != StateKind::significant) continue;
        double mass = std::accumulate(m[i].begin(), m[i].end(), 0.0);
        double residual = 1.0 - mass;
        if (residual < 0.0) {
            if (warnings)
                warnings->push_back("transitional mass " + std::to_string(mass) +
                                    " out of state " + states[i].label +
                                    " exceeds 1; residual clamped");
            residual = 0.0;
        }
        m[i][static_cast<std::size_t>(states[i].next_significant)] += residual;
    }

    for (std::size_t i = 0; i < n; ++i) {
        double sum = std::accumulate(m[i].begin(), m[i].end(), 0.0);
        if (sum <= 0.0) continue;
        for (double& x : m[i]) x /= sum;
    }
    return m;
}

Identity build_identity(const std::vector<Poi>& pois, const IdentityConfig& cfg,
                        std::uint64_t rng_seed) {
    Rng home_rng(mix_seed(rng_seed, kStreamHome));
    const Poi& home = draw_candidate(pois, PoiKind::residential, home_rng, "Home");
    return build_machine(pois, cfg, cfg.weekday, home.location, true, rng_seed,
                         kStreamWeekday);
}

UserModel build_user_model(const std::vector<Poi>& pois, const IdentityConfig& cfg,
                           std::uint64_t rng_seed) {
    Rng home_rng(mix_seed(rng_seed, kStreamHome));
    const Poi& home = draw_candidate(pois, PoiKind::residential, home_rng, "Home");
    UserModel user;
    user.weekday = build_machine(pois, cfg, cfg.weekday, home.location, true, rng_seed,
                                 kStreamWeekday);
    user.weekend = build_machine(pois, cfg, cfg.weekend, home.location, false, rng_seed,
                                 kStreamWeekend);
    return user;
}

void validate_identity(const Identity& identity) {
    const auto& states = identity.states;
    const auto& m = identity.transitions;
    const std::size_t n = states.size();
    if (m.size() != n) throw DomainError("transition matrix row count mismatch");

    for (std::size_t i = 0; i < n; ++i) {
        if (m[i].size() != n) throw DomainError("transition matrix column count mismatch");
        if (m[i][i] != 0.0) throw DomainError("nonzero diagonal entry");
        double sum = 0.0;
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) {
            double p = m[i][j];
            if (p < 0.0 || p > 1.0) throw DomainError("transition probability out of [0,1]");
            if (p == 0.0) continue;
            any = true;
            sum += p;

            const StateSpec& si = states[i];
            const StateSpec& sj = states[j];
            bool cond1 = si.kind == StateKind::significant &&
                         sj.kind == StateKind::transitional &&
                         sj.origin_state == si.id;
            bool cond2 = si.kind == StateKind::transitional &&
                         sj.kind == StateKind::significant &&
                         si.destination_state == sj.id;
            bool cond3 = false;
            if (si.kind == StateKind::transitional &&
                sj.kind == StateKind::transitional &&
                si.origin_state == sj.origin_state) {
                const GeoPoint& origin =
                    states[static_cast<std::size_t>(si.origin_state)].location;
                cond3 = haversine_distance(origin, si.location) <
                        haversine_distance(origin, sj.location);
            }
            bool chain = si.kind == StateKind::significant &&
                         sj.kind == StateKind::significant &&
                         si.next_significant == sj.id;
            if (!cond1 && !cond2 && !cond3 && !chain)
                throw DomainError("transition " + si.label + " -> " + sj.label +
                                  " is not licensed by any connectivity condition");
        }
        if (any && std::fabs(sum - 1.0) > kRowTol)
            throw DomainError("row " + states[i].label + " sums to " +
                              std::to_string(sum));
    }
}

std::string serialize_user(const UserModel& user) {
    json doc;
    doc["format"] = "mobisynth-identity";
    doc["version"] = 1;
    doc["seed"] = user.weekday.seed;
    doc["weekday"] = machine_to_json(user.weekday);
    doc["weekend"] = machine_to_json(user.weekend);
    return doc.dump(1, '\t') + "\n";
}

UserModel parse_user(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("identity file is not valid JSON: ") + e.what(), 0);
    }
    try {
        if (doc.at("format") != "mobisynth-identity")
            throw DomainError("not an identity file");
        if (doc.at("version") != 1)
            throw DomainError("unsupported identity version " + doc.at("version").dump());
        std::uint64_t seed = doc.at("seed").get<std::uint64_t>();
        UserModel user;
        user.weekday = machine_from_json(doc.at("weekday"), true, seed);
        user.weekend = machine_from_json(doc.at("weekend"), false, seed);
        return user;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("identity structure invalid: ") + e.what(), 0);
    }
}

void save_user(const std::string& path, const UserModel& user) {
    write_text_file(path, serialize_user(user));
}

UserModel load_user(const std::string& path) {
    return parse_user(read_text_file(path));
}

const StateSpec& state_by_id(const Identity& identity, int id) {
    // ids normally equal positions; scan as a fallback for sparse numbering
    if (id >= 0 && id < static_cast<int>(identity.states.size()) &&
        identity.states[static_cast<std::size_t>(id)].id == id)
        return identity.states[static_cast<std::size_t>(id)];
    for (const auto& s : identity.states)
        if (s.id == id) return s;
    throw DomainError("state id " + std::to_string(id) + " out of range");
}

}  // namespace mobisynth
