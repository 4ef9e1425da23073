#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rolekit/types.hpp"

namespace rolekit {

inline constexpr const char* kDefaultSeparator = "<|endoftext|>";
inline constexpr std::size_t kDefaultMaxSequenceLength = 2048;

enum class RecordKind { dialogue, probe };

std::string to_string(RecordKind kind);

/// One fine-tuning example. Only instruction, input and output are written
/// to the training file; id and kind drive ordering and statistics.
struct TrainRecord {
  std::string record_id;
  RecordKind kind = RecordKind::dialogue;
  std::string instruction;
  std::string input;
  std::string output;

  bool operator==(const TrainRecord&) const = default;
};

struct RecordOptions {
  std::string separator = kDefaultSeparator;
  /// Token budget shared by instruction and output.
  std::size_t max_sequence_length = kDefaultMaxSequenceLength;
};

/// "Name (speaking): 'text'" lines, as shown in the instruction.
std::string render_interactions(const std::vector<Turn>& turns);

/// Role-play instruction: act-like preamble, summary, scenario, thinking
/// and unfamiliarity directives, then the interactions. Interactions are
/// dropped oldest-first until the estimate fits `token_budget`; the last
/// interaction (the trigger) is never dropped. Throws ValidationError when
/// even the trigger alone does not fit.
std::string assemble_instruction(const RoleProfile& profile, std::string_view scenario,
                                 const std::vector<Turn>& interactions, double token_budget);

/// Scene overload; the scene must belong to the profile's role.
std::string assemble_instruction(const RoleProfile& profile, const Scene& scene,
                                 const std::vector<Turn>& interactions, double token_budget);

/// Scenario used for probe records, which have no scene of their own.
std::string probe_scenario(const RoleProfile& profile);

/// Speaker name for the probing side of a probe record.
inline constexpr const char* kProbeAskerName = "User";

/// Dialogue record. Output: "R (thinking):'...'\nR (speaking):'...'<sep>",
/// plus "\nOther (speaking):'...'<sep>" when the dialogue continues.
/// Throws PreconditionError for an unannotated pair.
TrainRecord assemble_record(const DialoguePair& pair, const RoleProfile& profile, const Scene& scene,
                            const RecordOptions& options = {});

/// Probe record. Output is the refusal (after its rationale thought, when
/// the probe has one) followed by the separator.
TrainRecord assemble_record(const HallucinationProbe& probe, const RoleProfile& profile,
                            const RecordOptions& options = {});

struct OutputUnit {
  std::string speaker;
  Action action = Action::speaking;
  std::string text;
  bool separated = false;
};

/// Splits an output into its "Name (action):'text'" lines. Throws
/// ParseError on any line that does not have that shape.
std::vector<OutputUnit> parse_output_units(std::string_view output, std::string_view separator);

/// Every way a record breaks the training-record format; empty when it
/// conforms. Works on the three emitted fields only, so it applies equally
/// to records read back from a training file.
std::vector<std::string> audit_record(const TrainRecord& record, const RoleProfile& profile,
                                      std::string_view separator = kDefaultSeparator);

struct TrainsetStats {
  std::size_t records = 0;
  std::size_t sentences = 0;
  double avg_words_per_sentence = 0.0;

  bool operator==(const TrainsetStats&) const = default;
};

/// Sentence and word counts over the unit texts of every output.
TrainsetStats compute_stats(const std::vector<TrainRecord>& records, std::string_view separator = kDefaultSeparator);

/// Fisher-Yates permutation of [0, n) driven by mt19937_64(seed), with
/// rejection-sampled bounds so the order is identical on every platform.
std::vector<std::size_t> shuffle_order(std::size_t n, std::uint64_t seed);

/// Sorts by record id, then applies shuffle_order.
std::vector<TrainRecord> order_records(std::vector<TrainRecord> records, std::uint64_t seed);

/// One {"instruction","input","output"} object per line.
std::string serialize_trainset(const std::vector<TrainRecord>& ordered);

/// Orders, writes atomically and returns the statistics. Throws
/// ValidationError on an empty record list.
TrainsetStats emit_trainset(const std::vector<TrainRecord>& records, const std::filesystem::path& path,
                            std::uint64_t seed, std::string_view separator = kDefaultSeparator);

/// Reads a training file back; record ids are "line-N", kinds are unknown
/// and left as dialogue.
std::vector<TrainRecord> read_trainset(const std::filesystem::path& path);

/// Hyperparameters handed to an external LoRA trainer.
struct TrainManifest {
  std::string base_model_hint = "Llama-3-8B";
  std::int64_t batch_size = 64;
  double learning_rate = 5e-5;
  std::int64_t epochs = 10;
  std::int64_t max_sequence_length = 2048;
  std::int64_t adapter_rank = 8;
  std::int64_t adapter_alpha = 16;
  std::string optimizer_name = "AdamW";
  std::string separator_token = kDefaultSeparator;
  std::uint64_t shuffle_seed = 0;
  std::map<std::string, std::size_t> record_counts;
  std::vector<std::string> overridden;
  TrainsetStats stats;

  nlohmann::ordered_json to_json() const;
  static TrainManifest from_json(const nlohmann::json& j);
};

/// Defaults with `overrides` applied (keys as in to_json). Numeric
/// hyperparameters must be positive; unknown keys are rejected.
TrainManifest make_manifest(const nlohmann::json& overrides = nlohmann::json::object());

}  // namespace rolekit
