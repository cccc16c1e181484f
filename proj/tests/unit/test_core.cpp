#include <doctest.h>

#include <fstream>

#include "avr/core/benchmark.hpp"
#include "avr/core/criteria.hpp"
#include "avr/core/errors.hpp"
#include "avr/core/io.hpp"
#include "avr/core/kvtree.hpp"
#include "avr/core/run_handle.hpp"
#include "support.hpp"

using namespace avr;

TEST_CASE("shipped benchmarks hold ten easy-moderate and four hard items") {
  const auto easy = load_benchmark(default_data_dir() / "benchmarks" / "easy_moderate.yaml");
  const auto hard = load_benchmark(default_data_dir() / "benchmarks" / "hard.yaml");
  CHECK(easy.size() == 10);
  CHECK(hard.size() == 4);
  int animations = 0;
  for (const auto& s : easy) animations += s.kind == ContentKind::animation;
  CHECK(animations == 5);
  for (const auto& s : hard) CHECK(s.kind == ContentKind::game);
  const auto all = load_shipped_benchmarks();
  CHECK(all.size() == 14);
  CHECK(find_spec(all, "bouncing-ball")->description == "Ball physics with gravity");
}

TEST_CASE("benchmark parsing rejects duplicates, unknown kinds and empty descriptions") {
  const std::string head = "schema: 1\nspecs:\n";
  const std::string a = "  - {id: x, kind: game, title: T, description: d}\n";
  CHECK_THROWS_AS(parse_benchmark(head + a + a, "dup"), ValidationError);
  CHECK_THROWS_AS(parse_benchmark(head + "  - {id: y, kind: movie, title: T, description: d}\n", "kind"),
                  ValidationError);
  CHECK_THROWS_AS(parse_benchmark(head + "  - {id: z, kind: game, title: T, description: ''}\n", "empty"),
                  ValidationError);
  CHECK(parse_benchmark(head + a, "ok").size() == 1);
}

TEST_CASE("each kind gets four base criteria and two of its own") {
  const auto game = criteria_for(ContentKind::game);
  const auto anim = criteria_for(ContentKind::animation);
  REQUIRE(game.size() == 6);
  REQUIRE(anim.size() == 6);
  CHECK(game[4].name == "Gameplay Quality");
  CHECK(game[5].name == "AI Player Quality");
  CHECK(anim[4].name == "Smoothness");
  CHECK(anim[5].name == "Creativity and Originality");
  ContentSpec spec{"bouncing-ball", ContentKind::animation, "Bouncing Ball", "Ball physics with gravity"};
  const auto text = render_criteria(spec);
  CHECK(text.find("How well does the animation match the following description? Description: Bouncing Ball") !=
        std::string::npos);
  CHECK(text.find("{content") == std::string::npos);
}

TEST_CASE("version lineage rules") {
  ContentVersion v{1, "<html></html>", VersionStage::initial_candidate, 0, std::nullopt, "c"};
  CHECK_NOTHROW(validate(v));
  v.parent = 0;
  CHECK_THROWS_AS(validate(v), ValidationError);
  ContentVersion w{3, "x", VersionStage::improved, 1, 4, "c"};
  CHECK_THROWS_AS(validate(w), ValidationError);
  w.parent = 2;
  CHECK_NOTHROW(validate(w));
  CHECK(version_stem(7) == "v007");
}

TEST_CASE("atomic writes leave no partial file") {
  test::TempDir dir("io");
  io::write_file_atomic(dir / "a/b.txt", "hello");
  CHECK(io::read_file(dir / "a/b.txt") == "hello");
  CHECK_FALSE(fs::exists(dir / "a/b.txt.partial"));
}

TEST_CASE("run config round-trips through the key-value tree") {
  RunConfig c;
  c.coder_model = "coder";
  c.k_initial = 3;
  c.improve_iters = 2;
  c.with_feedback = true;
  c.seed = 42;
  c.record_opts.duration_s = 5;
  const auto text = kv::emit(kv::to_node(c));
  CHECK(kv::run_config_from(kv::parse(text, "t")) == c);
}

TEST_CASE("run handle commits, resumes and quarantines uncommitted files") {
  test::TempDir dir("run");
  RunConfig cfg;
  ContentSpec spec{"s", ContentKind::game, "T", "d"};
  {
    auto run = RunHandle::open(dir.path(), cfg, spec);
    auto tx = run->begin_step("one");
    const auto v = tx.add_version(VersionStage::initial_candidate, 0, std::nullopt, "c", "<html>1</html>");
    CHECK(v.version_id == 1);
    run->commit(tx, {{"k", 1}});
    auto tx2 = run->begin_step("two");
    tx2.write("logs/orphan.txt", "x");
    tx2.add_version(VersionStage::improved, 1, 1, "c", "<html>2</html>");
  }
  auto run = RunHandle::open(dir.path(), cfg, spec);
  CHECK(run->resumed());
  CHECK(run->step_done("one"));
  CHECK_FALSE(run->step_done("two"));
  CHECK(run->step_data("one")->at("k") == 1);
  CHECK(run->versions().size() == 1);
  CHECK(fs::exists(dir / "logs/orphan.txt.partial"));
  CHECK(fs::exists(dir / "versions/v002.html.partial"));
  auto tx = run->begin_step("three");
  CHECK(tx.add_version(VersionStage::improved, 1, 1, "c", "z").version_id == 2);

  cfg.seed = 9;
  CHECK_THROWS_AS(RunHandle::open(dir.path(), cfg, spec), ValidationError);
}

TEST_CASE("a torn final journal line is ignored") {
  test::TempDir dir("torn");
  RunConfig cfg;
  ContentSpec spec{"s", ContentKind::game, "T", "d"};
  {
    auto run = RunHandle::open(dir.path(), cfg, spec);
    auto tx = run->begin_step("one");
    run->commit(tx);
  }
  {
    std::ofstream out(dir / "journal", std::ios::app);
    out << "{\"step\":\"two\",\"fi";
  }
  auto run = RunHandle::open(dir.path(), cfg, spec);
  CHECK(run->completed_steps() == std::vector<std::string>{"one"});
}
