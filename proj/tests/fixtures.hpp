#pragma once

// Small builders shared by the unit tests and the acceptance binary.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "foodgap/ingest.hpp"
#include "foodgap/vocab.hpp"

namespace fixtures {

inline foodgap::Fips fips(const char* s) { return *foodgap::Fips::parse(s); }

inline foodgap::Post post(std::string id, std::string user, const char* county,
                          std::vector<std::string> human, std::vector<std::string> machine) {
  foodgap::Post p;
  p.id = std::move(id);
  p.user = std::move(user);
  p.where = {-100.0, 40.0};
  p.human_tags = std::move(human);
  for (auto& m : machine) p.machine_tags.push_back({std::move(m), std::nullopt});
  if (county) p.county = fips(county);
  return p;
}

inline foodgap::Vocabulary vocab(const std::vector<std::string>& tags) {
  std::vector<foodgap::Tag> t;
  for (const auto& s : tags) t.push_back({s, foodgap::TagCategory::name_of_dish});
  return foodgap::Vocabulary(std::move(t));
}

// The worked example: one post, one user.
inline foodgap::Vocabulary fig1_vocab() {
  return vocab({"burger", "chicken", "fries", "chips", "ketchup", "milkshake"});
}
inline foodgap::Post fig1_post() {
  return post("fig1", "alice", "01001", {"burger", "foodie", "hungry", "yummy"},
              {"burger", "chicken", "fries", "chips", "ketchup", "milkshake"});
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("foodgap-test-" + name + "-" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Health CSV with nine metric columns.
inline std::string health_header() {
  return "fips,smokers,obesity,food_env_index,phys_inactive,excess_drink,alc_driving_deaths,"
         "diabetes,food_insecure,limited_access\n";
}

}  // namespace fixtures
