#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "swarm/scenario_io.hpp"

using namespace swarm;

namespace {

const std::filesystem::path kRoot = SWARM_SOURCE_DIR;

std::string load_error(const std::string& fixture) {
    try {
        load_scenario(kRoot / "tests" / "fixtures" / fixture);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidScenario) << e.what();
        return e.what();
    }
    ADD_FAILURE() << fixture << " loaded without error";
    return {};
}

}  // namespace

TEST(LoadScenario, CanonicalThree) {
    const Scenario sc = load_scenario(kRoot / "scenarios" / "canonical_3.json");
    EXPECT_EQ(sc.name, "canonical_3");
    EXPECT_EQ(sc.mode, Mode::CPSR);
    ASSERT_EQ(sc.drones.size(), 3u);
    EXPECT_EQ(sc.drones[1].id, 2);
    EXPECT_EQ(sc.drones[1].position, Vec2(-6.0, 8.0));
    EXPECT_DOUBLE_EQ(sc.drones[0].speed_limit, 10.0);
    EXPECT_EQ(sc.formation.size(), 3u);
    ASSERT_EQ(sc.obstacles.size(), 1u);
    EXPECT_EQ(sc.obstacles[0].velocity, Vec2(-3.0, 0.0));
    EXPECT_DOUBLE_EQ(sc.tick_dt, 0.1);
    EXPECT_DOUBLE_EQ(sc.effective_cell_size(), 3.0);
    EXPECT_DOUBLE_EQ(sc.formation_edge(), 10.0);
    EXPECT_EQ(sc.ga.population_size, 100);
    EXPECT_EQ(sc.large_variant, "canonical_8.json");
}

TEST(LoadScenario, CanonicalEight) {
    const Scenario sc = load_scenario(kRoot / "scenarios" / "canonical_8.json");
    EXPECT_EQ(sc.drones.size(), 8u);
    EXPECT_EQ(sc.formation.size(), 8u);
    EXPECT_TRUE(sc.large_variant.empty());
}

TEST(LoadScenario, DefaultsFillOptionalFields) {
    const nlohmann::json doc = {{"schema_version", 1},
                                {"destination", {100.0, 0.0}},
                                {"drones", {{{"id", 1}, {"position", {0.0, 0.0}}}}},
                                {"formation", {{0.0, 0.0}}}};
    const Scenario sc = scenario_from_json(doc);
    EXPECT_EQ(sc.mode, Mode::CPSR);
    EXPECT_DOUBLE_EQ(sc.drones[0].speed_limit, 2.0 * sc.cruise_speed);
    EXPECT_DOUBLE_EQ(sc.effective_cell_size(), 2.0 * sc.safety_radius);
    EXPECT_DOUBLE_EQ(sc.effective_arrival_radius(), sc.effective_cell_size());
    EXPECT_TRUE(sc.obstacles.empty());
}

TEST(MalformedFixtures, DiagnosticsNameTheField) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"tick_dt_zero.json", "tick_dt"},
        {"missing_destination.json", "destination"},
        {"unknown_key.json", "drone_count"},
        {"formation_short.json", "formation"},
        {"negative_radius.json", "obstacles.radius"},
        {"duplicate_id.json", "drones.id"},
        {"cruise_speed_string.json", "cruise_speed"},
        {"ga_mutation_rate.json", "ga"},
        {"position_arity.json", "drones.position"},
        {"schema_version.json", "schema_version"},
        {"destination_at_spawn.json", "destination"},
        {"unknown_mode.json", "mode"},
        {"grid_unknown_key.json", "grid.cell"},
        {"truncated.json", "malformed JSON"},
    };
    for (const auto& [file, field] : cases) {
        const std::string msg = load_error(file);
        EXPECT_NE(msg.find(field), std::string::npos) << file << ": \"" << msg << "\" does not name " << field;
    }
}

TEST(MalformedFixtures, FieldLeadsTheMessage) {
    EXPECT_EQ(load_error("tick_dt_zero.json"), "InvalidScenario: tick_dt: must be > 0");
    EXPECT_EQ(load_error("negative_radius.json").rfind("InvalidScenario: obstacles.radius:", 0), 0u);
}

TEST(LoadScenario, MissingFile) {
    try {
        load_scenario(kRoot / "tests" / "fixtures" / "does_not_exist.json");
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidScenario);
    }
}
