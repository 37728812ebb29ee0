#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "snngx/io.hpp"
#include "snngx/synthetic.hpp"
#include "test_support.hpp"

using namespace snngx;
namespace fs = std::filesystem;

namespace {

fs::path golden_dir() { return fs::path(SNNGX_GOLDEN_DIR); }

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "snngx_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string slurp_str(const fs::path& p) {
  auto bytes = slurp(p);
  return {bytes.begin(), bytes.end()};
}

ExperimentReport sample_report() {
  ExperimentReport r;
  r.config_hash = io::fnv1a_hex("sample-config");
  r.seed = 7;
  r.started_at = "2025-01-01T00:00:00Z";
  r.finished_at = "2025-01-01T00:00:05Z";
  r.rows = {{0, 130.5, 61, 0.75}, {1, 64.25, 50, 0.5}, {2, 12.5, 50, 0.25}};
  r.final_accuracy = 0.25;
  r.final_distance = 50;
  r.generations_run = 2;
  r.genome_length = 64;
  return r;
}

SecretKey sample_key() {
  SecretKey key;
  key.layer = 1;
  key.n_bit = 8;
  key.genome_length = 4;
  key.positions = {0, 2};
  key.meta = {5, 42, 12, 0.25};
  return key;
}

}  // namespace

TEST_CASE("spike bit packing uses row-major little-endian bit order") {
  SpikeTrain t(2, 5);  // 10 bits -> 2 bytes
  t.set(0, 0, true);   // flat bit 0 -> byte 0, bit 0
  t.set(0, 3, true);   // flat bit 3
  t.set(1, 2, true);   // flat bit 7
  t.set(1, 4, true);   // flat bit 9 -> byte 1, bit 1
  auto packed = io::pack_spike_bits(t);
  REQUIRE(packed.size() == 2);
  CHECK(packed[0] == 0b10001001);
  CHECK(packed[1] == 0b00000010);
  CHECK(io::unpack_spike_bits(packed, 2, 5) == t);
}

TEST_CASE("dataset roundtrips bit-exactly") {
  auto ds = generate_synthetic(test::block_task_spec(31, 0.1, 3));
  auto path = temp_file("ds.sngx");
  io::save_dataset(ds, path);
  auto loaded = io::load_dataset(path);
  CHECK(loaded == ds);
  auto bytes = io::dataset_to_bytes(loaded);
  CHECK(std::vector<std::uint8_t>(bytes.begin(), bytes.end()) == slurp(path));
}

TEST_CASE("dataset loader rejects malformed files with distinct codes") {
  auto ds = generate_synthetic(test::golden_dataset_spec());
  std::string bytes = io::dataset_to_bytes(ds);

  SUBCASE("corrupted magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    std::vector<std::uint8_t> v(bad.begin(), bad.end());
    try {
      io::dataset_from_bytes(v);
      FAIL("expected io_error");
    } catch (const io_error& e) {
      CHECK(e.code() == io_errc::bad_magic);
    }
  }
  SUBCASE("unknown version") {
    std::string bad = bytes;
    bad[4] = 9;
    std::vector<std::uint8_t> v(bad.begin(), bad.end());
    try {
      io::dataset_from_bytes(v);
      FAIL("expected io_error");
    } catch (const io_error& e) {
      CHECK(e.code() == io_errc::bad_version);
    }
  }
  SUBCASE("truncation at every prefix length") {
    for (std::size_t cut : {3UL, 5UL, 12UL, 18UL, bytes.size() - 1}) {
      std::vector<std::uint8_t> v(bytes.begin(), bytes.begin() + static_cast<long>(cut));
      try {
        io::dataset_from_bytes(v);
        FAIL("expected io_error at cut ", cut);
      } catch (const io_error& e) {
        CHECK(e.code() == io_errc::truncated);
      }
    }
  }
  SUBCASE("trailing bytes") {
    std::string bad = bytes + '\0';
    std::vector<std::uint8_t> v(bad.begin(), bad.end());
    try {
      io::dataset_from_bytes(v);
      FAIL("expected io_error");
    } catch (const io_error& e) {
      CHECK(e.code() == io_errc::invalid_field);
    }
  }
}

TEST_CASE("network JSON roundtrips for float and quantized variants") {
  SUBCASE("float") {
    auto net = test::golden_float_net();
    auto path = temp_file("float_net.json");
    io::save_network(net, path);
    auto loaded = io::load_float_network(path);
    CHECK(loaded == net);  // shortest-roundtrip decimals reload to equal values
  }
  SUBCASE("quantized") {
    auto net = test::golden_quant_net();
    auto path = temp_file("quant_net.json");
    io::save_network(net, path);
    auto loaded = io::load_quantized_network(path);
    CHECK(loaded == net);
  }
  SUBCASE("variant detection via n_bit") {
    auto path = temp_file("variant_net.json");
    io::save_network(test::golden_quant_net(), path);
    CHECK_THROWS_AS(io::load_float_network(path), io_error);
  }
  SUBCASE("randomized quantized roundtrips") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto net = test::random_quant_net(seed, {5, -4, 3}, 6);
      auto path = temp_file("rand_net.json");
      io::save_network(net, path);
      CHECK(io::load_quantized_network(path) == net);
    }
  }
}

TEST_CASE("network loader surfaces schema violations") {
  auto j = io::network_to_json(test::golden_quant_net());
  SUBCASE("bad kind") {
    j["layers"][0]["kind"] = "Conv";
    CHECK_THROWS_AS(io::network_from_json(j), io_error);
  }
  SUBCASE("wrong weight count") {
    j["layers"][0]["weights"] = {1, 2, 3};
    CHECK_THROWS_AS(io::network_from_json(j), io_error);
  }
  SUBCASE("broken layer chaining") {
    j["layers"][1]["n_in"] = 7;
    CHECK_THROWS_AS(io::network_from_json(j), io_error);
  }
  SUBCASE("future version") {
    j["version"] = 99;
    try {
      io::network_from_json(j);
      FAIL("expected io_error");
    } catch (const io_error& e) {
      CHECK(e.code() == io_errc::bad_version);
    }
  }
}

TEST_CASE("secret key JSON roundtrips and validates") {
  auto key = sample_key();
  auto path = temp_file("key.json");
  io::save_key(key, path);
  CHECK(io::load_key(path) == key);

  SUBCASE("duplicate positions are named") {
    auto j = io::key_to_json(key);
    j["positions"] = {1, 1};
    try {
      io::key_from_json(j);
      FAIL("expected io_error");
    } catch (const io_error& e) {
      CHECK(e.code() == io_errc::invalid_field);
      CHECK(std::string(e.what()).find("positions[1]") != std::string::npos);
    }
  }
  SUBCASE("position beyond genome_length") {
    auto j = io::key_to_json(key);
    j["positions"] = {9};
    CHECK_THROWS_AS(io::key_from_json(j), io_error);
  }
}

TEST_CASE("report JSON and CSV") {
  auto report = sample_report();
  auto jpath = temp_file("report.json");
  io::save_report_json(report, jpath);
  CHECK(io::load_report_json(jpath) == report);

  auto cpath = temp_file("report.csv");
  io::save_report_csv(report, cpath);
  auto bytes = slurp(cpath);
  std::string text(bytes.begin(), bytes.end());
  CHECK(text.starts_with("generation,best_fitness,best_distance,accuracy\n"));
  CHECK(text.find("\n1,64.25,50,0.5\n") != std::string::npos);
}

TEST_CASE("events CSV import") {
  auto path = temp_file("events.csv");
  {
    std::ofstream out(path);
    out << "# t,feature\n";
    out << "0,1\n";
    out << "2,0\n";
    out << "\n";
    out << "2,3\n";
  }
  auto train = io::load_events_csv(path, 3, 4);
  CHECK(train.at(0, 1) == 1);
  CHECK(train.at(2, 0) == 1);
  CHECK(train.at(2, 3) == 1);
  std::size_t total = 0;
  for (auto b : train.bits()) total += b;
  CHECK(total == 3);

  SUBCASE("out-of-range event") {
    std::ofstream out(path);
    out << "5,0\n";
    out.close();
    CHECK_THROWS_AS(io::load_events_csv(path, 3, 4), io_error);
  }
  SUBCASE("garbage line") {
    std::ofstream out(path);
    out << "zero,one\n";
    out.close();
    CHECK_THROWS_AS(io::load_events_csv(path, 3, 4), io_error);
  }
}

TEST_CASE("golden files load, match the fixtures, and re-save byte-identically") {
  SUBCASE("dataset") {
    auto path = golden_dir() / "dataset.sngx";
    auto loaded = io::load_dataset(path);
    CHECK(loaded == generate_synthetic(test::golden_dataset_spec()));
    auto bytes = io::dataset_to_bytes(loaded);
    CHECK(std::vector<std::uint8_t>(bytes.begin(), bytes.end()) == slurp(path));
  }
  SUBCASE("float network") {
    auto path = golden_dir() / "network_float.json";
    auto loaded = io::load_float_network(path);
    CHECK(loaded == test::golden_float_net());
    CHECK(io::network_to_json(loaded).dump(2) + "\n" ==
          slurp_str(path));
  }
  SUBCASE("quantized network") {
    auto path = golden_dir() / "network_quant.json";
    auto loaded = io::load_quantized_network(path);
    CHECK(loaded == test::golden_quant_net());
    CHECK(io::network_to_json(loaded).dump(2) + "\n" ==
          slurp_str(path));
  }
  SUBCASE("key") {
    auto path = golden_dir() / "key.json";
    auto loaded = io::load_key(path);
    CHECK(loaded == sample_key());
    CHECK(io::key_to_json(loaded).dump(2) + "\n" ==
          slurp_str(path));
  }
  SUBCASE("report") {
    auto path = golden_dir() / "report.json";
    auto loaded = io::load_report_json(path);
    CHECK(loaded == sample_report());
    CHECK(io::report_to_json(loaded).dump(2) + "\n" ==
          slurp_str(path));
  }
}

// Regenerates tests/golden when run by hand:
//   io_tests --test-case="golden generator" --no-skip
TEST_CASE("golden generator" * doctest::skip()) {
  fs::create_directories(golden_dir());
  io::save_dataset(generate_synthetic(test::golden_dataset_spec()), golden_dir() / "dataset.sngx");
  io::save_network(test::golden_float_net(), golden_dir() / "network_float.json");
  io::save_network(test::golden_quant_net(), golden_dir() / "network_quant.json");
  io::save_key(sample_key(), golden_dir() / "key.json");
  io::save_report_json(sample_report(), golden_dir() / "report.json");
  MESSAGE("golden files regenerated under ", golden_dir().string());
}
