#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mobisynth/geo.hpp"
#include "mobisynth/osm.hpp"

namespace mobisynth {

enum class StateKind { significant, transitional };

// One state of a user's mobility machine. Significant states (home, the
// day's anchor activity) are visited daily and chain into a fixed cycle via
// next_significant; transitional states interrupt one leg of that cycle and
// carry the leg's endpoints as origin_state/destination_state.
struct StateSpec {
    int id = 0;
    std::string label;
    StateKind kind = StateKind::significant;
    GeoPoint location{0.0, 0.0};
    double t_min_s = 0.0;
    double arrival_earliest_s = 0.0;
    double arrival_latest_s = 86399.0;
    int frequency_days = 1;
    double occurrence_prob = 1.0;
    int next_significant = -1;
    int origin_state = -1;
    int destination_state = -1;
};

struct Identity {
    std::vector<StateSpec> states;
    std::vector<std::vector<double>> transitions;
    bool weekday = true;
    std::uint64_t seed = 0;
};

// Both machines of one user; they share the home location.
struct UserModel {
    Identity weekday;
    Identity weekend;
};

// Which leg of the significant cycle a transitional state interrupts.
enum class Leg { morning, midday, evening };

struct TransitionalConfig {
    std::string label;
    PoiKind poi_kind = PoiKind::restaurant;
    Leg leg = Leg::morning;
    int freq_lo = 2;
    int freq_hi = 30;
    // Gas stations derive their frequency from fuel range instead of (l,u).
    bool frequency_from_fuel = false;
    double t_min_s = 300.0;
    double arrival_earliest_s = 0.0;
    double arrival_latest_s = 86399.0;
};

struct MachineConfig {
    std::string anchor_label = "Work";
    PoiKind anchor_poi_kind = PoiKind::work;
    double anchor_t_min_s = 28800.0;
    double anchor_arrival_earliest_s = 28800.0;
    double anchor_arrival_latest_s = 32400.0;
    std::vector<TransitionalConfig> transitional;
    // How many transitional states to draw from the list; -1 keeps all.
    int n_transitional = -1;
};

struct IdentityConfig {
    int workdays_per_year = 250;
    double mileage_lo = 8.0;   // km per liter
    double mileage_hi = 16.0;
    double tank_lo = 35.0;     // liters
    double tank_hi = 60.0;
    double home_t_min_s = 0.0;
    MachineConfig weekday;
    MachineConfig weekend;
};

// Weekday: Work anchor 8:00-9:00 with an 8 h stay, School and Gas on the
// morning leg, Lunch midday, Dinner on the way home. Weekend: Cinema anchor
// with a Restaurant stop on the way back.
IdentityConfig default_identity_config();

// Workdays before the tank falls below a quarter, driving home-work-home
// daily: floor(0.75 m c / round trip), at least 1.
int gas_frequency(double m_km_per_liter, double c_liters, const GeoPoint& home,
                  const GeoPoint& work);

// Transition matrix over the annotated states. Edges exist where one of the
// connectivity conditions holds; rows are normalized to sum 1. Clamped
// residuals are reported through warnings when given.
std::vector<std::vector<double>> build_transitions(
    const std::vector<StateSpec>& states, std::vector<std::string>* warnings = nullptr);

Identity build_identity(const std::vector<Poi>& pois, const IdentityConfig& cfg,
                        std::uint64_t rng_seed);
UserModel build_user_model(const std::vector<Poi>& pois, const IdentityConfig& cfg,
                           std::uint64_t rng_seed);

// Re-checks every structural invariant: row stochasticity, zero diagonal,
// and that each positive entry is licensed by a connectivity condition.
void validate_identity(const Identity& identity);

// State lookup by id; unknown ids are domain errors.
const StateSpec& state_by_id(const Identity& identity, int id);

std::string serialize_user(const UserModel& user);
UserModel parse_user(std::string_view text);
void save_user(const std::string& path, const UserModel& user);
UserModel load_user(const std::string& path);

}  // namespace mobisynth
