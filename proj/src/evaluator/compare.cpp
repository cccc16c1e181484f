#include "avr/core/errors.hpp"
#include "avr/evaluator/evaluator.hpp"

namespace avr::evaluator {

using gateway::Message;

namespace {

gateway::JudgeHint hint_of(const Side& s) {
  return {s.recording.audio_rms, s.recording.frame_variance, s.console_errors};
}

Message media_message(const Side& side, char label, std::string text) {
  Message m{gateway::Role::user, {gateway::TextPart{std::move(text)}}};
  for (auto& p : gateway::media_parts(side.recording.media_path, std::string(1, label), hint_of(side)))
    m.parts.push_back(std::move(p));
  return m;
}

class Session {
 public:
  Session(const Judges& judges, ArtifactSink& sink, std::string cmp_id)
      : judges_(judges), sink_(sink), cmp_id_(std::move(cmp_id)) {}

  Round ask(gateway::ModelClient& client, std::vector<Message>& convo, const std::string& tag) {
    const auto label = cmp_id_ + "." + tag;
    gateway::ChatRequest req{convo, judges_.temperature, judges_.seed};
    gateway::ChatContext ctx{&sink_, label, judges_.clock, {}};
    auto reply = gateway::chat(client, req, ctx);
    Round r{convo.back().text(), reply.text, "transcripts/" + label + ".json"};
    convo.push_back(Message::assistant(reply.text));
    return r;
  }

 private:
  const Judges& judges_;
  ArtifactSink& sink_;
  std::string cmp_id_;
};

}  // namespace

nlohmann::json to_json(const ComparisonRecord& r) {
  auto round = [](const Round& x) {
    return nlohmann::json{{"prompt", x.prompt}, {"reply", x.reply}, {"transcript", x.transcript}};
  };
  nlohmann::json omni = nlohmann::json::array();
  for (const auto& x : r.omni_transcript) omni.push_back(round(x));
  return {{"cmp_id", r.cmp_id},
          {"spec_id", r.spec_id},
          {"side_a", r.side_a},
          {"side_b", r.side_b},
          {"mode", {{"multiround", r.mode.multiround}, {"relative", r.mode.relative}, {"review", r.mode.review}}},
          {"omni_transcript", std::move(omni)},
          {"review_transcript", r.review_transcript ? round(*r.review_transcript) : nlohmann::json(nullptr)},
          {"verdict", std::string(1, r.verdict)},
          {"winner", r.winner()},
          {"parse_status", to_string(r.parse_status)},
          {"flagged", r.flagged()}};
}

ComparisonRecord comparison_from(const nlohmann::json& j) {
  auto round = [](const nlohmann::json& x) {
    return Round{x.at("prompt").get<std::string>(), x.at("reply").get<std::string>(),
                 x.value("transcript", std::string())};
  };
  ComparisonRecord r;
  r.cmp_id = j.at("cmp_id").get<std::string>();
  r.spec_id = j.at("spec_id").get<std::string>();
  r.side_a = j.at("side_a").get<std::string>();
  r.side_b = j.at("side_b").get<std::string>();
  const auto& m = j.at("mode");
  r.mode = {m.at("multiround").get<bool>(), m.at("relative").get<bool>(), m.at("review").get<bool>()};
  for (const auto& x : j.at("omni_transcript")) r.omni_transcript.push_back(round(x));
  if (j.contains("review_transcript") && !j.at("review_transcript").is_null())
    r.review_transcript = round(j.at("review_transcript"));
  const auto v = j.at("verdict").get<std::string>();
  if (v != "A" && v != "B") throw ValidationError("comparison " + r.cmp_id + ": verdict must be A or B");
  r.verdict = v[0];
  r.parse_status = parse_status_from(j.at("parse_status").get<std::string>());
  return r;
}

ComparisonRecord compare(const Side& a, const Side& b, const ContentSpec& spec, const EvalMode& mode,
                         const Judges& judges, ArtifactSink& sink, const std::string& cmp_id) {
  mode.validate();
  if (!judges.omni) throw ValidationError("compare needs an omni judge");
  if (judges.omni->capability() != gateway::Capability::omni)
    throw gateway::CapabilityError("judge '" + judges.omni->name() + "' cannot take video and audio");
  if (mode.review && !judges.reviewer) throw ValidationError("mode " + mode.token() + " needs a reviewer");

  ComparisonRecord rec;
  rec.cmp_id = cmp_id;
  rec.spec_id = spec.id;
  rec.side_a = a.content_id;
  rec.side_b = b.content_id;
  rec.mode = mode;
  Session s(judges, sink, cmp_id);
  auto& omni = *judges.omni;

  if (mode.multiround) {
    std::vector<Message> convo{media_message(a, 'A', prompts::describe(spec, 'A'))};
    rec.omni_transcript.push_back(s.ask(omni, convo, "omni1"));
    convo.push_back(media_message(b, 'B', prompts::describe(spec, 'B')));
    rec.omni_transcript.push_back(s.ask(omni, convo, "omni2"));
    convo.push_back(Message::user(prompts::decide(spec)));
    rec.omni_transcript.push_back(s.ask(omni, convo, "omni3"));
  } else if (mode.relative) {
    auto m = media_message(a, 'A', prompts::single(spec));
    for (auto& p : gateway::media_parts(b.recording.media_path, "B", hint_of(b))) m.parts.push_back(std::move(p));
    std::vector<Message> convo{std::move(m)};
    rec.omni_transcript.push_back(s.ask(omni, convo, "omni1"));
  } else {
    std::vector<Message> ca{media_message(a, 'A', prompts::independent(spec, 'A'))};
    rec.omni_transcript.push_back(s.ask(omni, ca, "omni1"));
    std::vector<Message> cb{media_message(b, 'B', prompts::independent(spec, 'B'))};
    rec.omni_transcript.push_back(s.ask(omni, cb, "omni2"));
    if (!mode.review) {
      std::vector<Message> cf{
          Message::user(prompts::final_pick(spec, rec.omni_transcript[0].reply, rec.omni_transcript[1].reply))};
      rec.omni_transcript.push_back(s.ask(omni, cf, "omni3"));
    }
  }

  std::string deciding = rec.omni_transcript.back().reply;
  if (mode.review) {
    std::vector<Message> convo{Message::user(prompts::review(spec, rec.omni_transcript, mode.relative))};
    rec.review_transcript = s.ask(*judges.reviewer, convo, "review");
    deciding = rec.review_transcript->reply;
  }
  const auto v = parse_verdict(deciding);
  rec.verdict = v.side;
  rec.parse_status = v.status;
  sink.write(fs::path("comparisons") / (cmp_id + ".json"), to_json(rec).dump(2) + "\n");
  return rec;
}

DuelResult duel(const std::optional<Side>& a, const std::optional<Side>& b, const ContentSpec& spec,
                const EvalMode& mode, const Judges& judges, ArtifactSink& sink, const std::string& duel_id) {
  DuelResult d;
  if (!a || !b) {
    if (a) d.a_wins = 2;
    if (b) d.b_wins = 2;
    return d;
  }
  const auto ab = compare(*a, *b, spec, mode, judges, sink, duel_id + "-ab");
  const auto ba = compare(*b, *a, spec, mode, judges, sink, duel_id + "-ba");
  (ab.verdict == 'A' ? d.a_wins : d.b_wins) += 1;
  (ba.verdict == 'A' ? d.b_wins : d.a_wins) += 1;
  d.cmp_ids = {ab.cmp_id, ba.cmp_id};
  return d;
}

}  // namespace avr::evaluator
