// Copyright 2026 The AGV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// agv: command-line front end over the C API.
//
//   agv init --seed S [config flags] --out model.agvw
//   agv inspect --weights model.agvw
//   agv embed --manifest m.jsonl [--weights W | --seed S] [config flags] --out DIR
//   agv mel AUDIO / agv f0 AUDIO          (CSV on stdout)
//   agv simmatrix --index DIR/index.json [--group-by speaker|language] --out PREFIX
//   agv abx --reference E (--index I | --candidates E...)
//   agv selftest [--weights W] [--manifest M]
//   agv synth --f0 HZ [--tilt DB] [--seconds S] [--seed S] --out x.wav
//
// Exit codes: 0 ok, 2 input error, 3 config/weight error, 4 internal.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "agv/agv.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitInternal = 4;

int ExitCodeFor(agv_status s) {
  switch (s) {
    case AGV_OK:
      return kExitOk;
    case AGV_ERR_MALFORMED_CONTAINER:
    case AGV_ERR_UNSUPPORTED_ENCODING:
    case AGV_ERR_EMPTY_AUDIO:
    case AGV_ERR_RATE_OUT_OF_RANGE:
    case AGV_ERR_TOO_SHORT:
    case AGV_ERR_EMPTY_CONTOUR:
    case AGV_ERR_ZERO_NORM:
    case AGV_ERR_IO:
    case AGV_ERR_INVALID_ARGUMENT:
      return kExitInput;
    case AGV_ERR_DEGENERATE_BAND:
    case AGV_ERR_SHAPE_MISMATCH:
    case AGV_ERR_EVEN_KERNEL:
    case AGV_ERR_INDIVISIBLE_HEADS:
    case AGV_ERR_INDIVISIBLE_SCALE:
    case AGV_ERR_MISSING_PARAMETER:
    case AGV_ERR_UNEXPECTED_PARAMETER:
    case AGV_ERR_INVALID_CONFIG:
    case AGV_ERR_BAD_MAGIC:
    case AGV_ERR_HEADER_MISMATCH:
    case AGV_ERR_TRUNCATED_PAYLOAD:
    case AGV_ERR_DIM_MISMATCH:
    case AGV_ERR_LABEL_MISMATCH:
      return kExitConfig;
    default:
      return kExitInternal;
  }
}

// Carries an exit code out of a subcommand.
struct Failure {
  int exit_code;
  std::string message;
};

[[noreturn]] void Fail(int code, const std::string& message) { throw Failure{code, message}; }

void Check(agv_status s, const std::string& context) {
  if (s == AGV_OK) return;
  Fail(ExitCodeFor(s), context + ": " + agv_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Audio = std::unique_ptr<agv_audio, Deleter<agv_audio, agv_audio_free>>;
using Matrix = std::unique_ptr<agv_matrix, Deleter<agv_matrix, agv_matrix_free>>;
using Model = std::unique_ptr<agv_model, Deleter<agv_model, agv_model_free>>;
using Embedding = std::unique_ptr<agv_embedding, Deleter<agv_embedding, agv_embedding_free>>;

std::string HashHex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void WriteAtomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(kExitInput, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(kExitInput, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) Fail(kExitInput, "cannot rename onto " + path.string() + ": " + ec.message());
}

std::string FormatG9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Model configuration flags shared by init and embed. Only flags the user
// actually passed override a loaded configuration.
struct ConfigFlags {
  std::string mode;
  bool no_split = false;
  int tokens = 0;
  int heads = 0;
  int dmodel = 0;
  int channels = 0;
  std::string scale_mode;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* split_opt = nullptr;
  CLI::Option* tokens_opt = nullptr;
  CLI::Option* heads_opt = nullptr;
  CLI::Option* dmodel_opt = nullptr;
  CLI::Option* channels_opt = nullptr;
  CLI::Option* scale_opt = nullptr;

  void Register(CLI::App* app) {
    mode_opt = app->add_option("--mode", mode, "se | se+f0 | se+me | se+f0+me | se+me+f0");
    split_opt = app->add_flag("--no-split", no_split, "disable representation splitting");
    tokens_opt = app->add_option("--tokens", tokens, "learned token count N")->check(CLI::PositiveNumber);
    heads_opt = app->add_option("--heads", heads, "fusion attention heads")->check(CLI::PositiveNumber);
    dmodel_opt = app->add_option("--dmodel", dmodel, "embedding dimension d")->check(CLI::PositiveNumber);
    channels_opt = app->add_option("--channels", channels, "backbone channels C")->check(CLI::PositiveNumber);
    scale_opt = app->add_option("--scale-mode", scale_mode, "sqrt | linear")
                    ->check(CLI::IsMember({"sqrt", "linear"}));
  }

  bool AnyGiven() const {
    for (const CLI::Option* o :
         {mode_opt, split_opt, tokens_opt, heads_opt, dmodel_opt, channels_opt, scale_opt})
      if (o->count() > 0) return true;
    return false;
  }

  void ApplyTo(agv_model_config* c) const {
    if (mode_opt->count()) {
      agv_mode m;
      if (agv_mode_parse(mode.c_str(), &m) != AGV_OK) Fail(kExitConfig, "unknown mode " + mode);
      c->mode = m;
    }
    if (split_opt->count()) c->splitting = no_split ? 0 : 1;
    if (tokens_opt->count()) c->n_tokens = tokens;
    if (heads_opt->count()) c->heads = heads;
    if (dmodel_opt->count()) c->d_model = dmodel;
    if (channels_opt->count()) c->channels = channels;
    if (scale_opt->count()) c->scale_mode = scale_mode == "linear" ? AGV_SCALE_LINEAR : AGV_SCALE_SQRT;
  }
};

struct ManifestRecord {
  fs::path path;
  std::string utterance_id;
  std::string speaker_id;
  std::string language;
};

std::vector<ManifestRecord> ReadManifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) Fail(kExitInput, "cannot open manifest " + manifest.string());
  const fs::path base = manifest.parent_path();
  std::vector<ManifestRecord> out;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      Fail(kExitInput, manifest.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("path") || !j.contains("utterance_id"))
      Fail(kExitInput, manifest.string() + ":" + std::to_string(line_no) +
                           ": record needs path and utterance_id");
    ManifestRecord r;
    try {
      fs::path p = j.at("path").get<std::string>();
      r.path = p.is_absolute() ? p : base / p;
      r.utterance_id = j.at("utterance_id").get<std::string>();
      r.speaker_id = j.value("speaker_id", std::string());
      r.language = j.value("language", std::string());
    } catch (const json::exception& e) {
      Fail(kExitInput, manifest.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (r.utterance_id.empty())
      Fail(kExitInput, manifest.string() + ":" + std::to_string(line_no) + ": empty utterance_id");
    if (!seen.insert(r.utterance_id).second)
      Fail(kExitInput, "duplicate utterance_id " + r.utterance_id);
    out.push_back(std::move(r));
  }
  if (out.empty()) Fail(kExitInput, "manifest " + manifest.string() + " has no records");
  return out;
}

std::string SafeFileStem(const std::string& id) {
  std::string s;
  for (char c : id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    s += ok ? c : '_';
  }
  if (s.empty() || s[0] == '.') s.insert(s.begin(), '_');
  return s;
}

size_t WorkerCount(size_t jobs) {
  size_t n = std::max<size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AGV_NUM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<size_t>(v);
  }
  return std::min(n, std::max<size_t>(jobs, 1));
}

// Runs job(i) for i in [0, n) on a small pool. Results are stored by index,
// so output never depends on scheduling.
template <typename Job>
void ParallelFor(size_t n, Job job) {
  const size_t workers = WorkerCount(n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) job(i);
    });
  for (std::thread& t : pool) t.join();
}

Audio LoadAudio(const std::string& path) {
  agv_audio* a = nullptr;
  Check(agv_audio_read_wav(path.c_str(), &a), path);
  return Audio(a);
}

Audio LoadCanonical(const std::string& path) {
  Audio raw = LoadAudio(path);
  agv_audio* c = nullptr;
  Check(agv_audio_canonicalize(raw.get(), 0, &c), path);
  return Audio(c);
}

Model LoadModel(const std::string& path) {
  agv_model* m = nullptr;
  Check(agv_model_load(path.c_str(), &m), path);
  return Model(m);
}

Embedding LoadEmbedding(const std::string& path) {
  agv_embedding* e = nullptr;
  Check(agv_embedding_load(path.c_str(), &e), path);
  return Embedding(e);
}

std::vector<const agv_embedding*> Raw(const std::vector<Embedding>& items) {
  std::vector<const agv_embedding*> out;
  for (const Embedding& e : items) out.push_back(e.get());
  return out;
}

std::vector<const char*> CStrings(const std::vector<std::string>& items) {
  std::vector<const char*> out;
  for (const std::string& s : items) out.push_back(s.c_str());
  return out;
}

// ---- init / inspect -------------------------------------------------------

int RunInit(const ConfigFlags& flags, uint64_t seed, const std::string& out) {
  agv_model_config config;
  agv_model_config_default(&config);
  flags.ApplyTo(&config);
  agv_model* raw = nullptr;
  Check(agv_model_init(&config, seed, &raw), "init");
  Model model(raw);
  Check(agv_model_save(model.get(), out.c_str()), out);
  std::printf("wrote %s mode=%s seed=%llu config_hash=%s tensors=%zu\n", out.c_str(),
              agv_mode_name(config.mode), static_cast<unsigned long long>(seed),
              HashHex(agv_model_config_hash(model.get())).c_str(),
              agv_model_tensor_count(model.get()));
  return kExitOk;
}

int RunInspect(const std::string& weights) {
  Model model = LoadModel(weights);
  agv_model_config c;
  agv_model_get_config(model.get(), &c);
  std::printf("# mode=%s splitting=%d tokens=%d heads=%d dmodel=%d channels=%d scale=%s\n",
              agv_mode_name(c.mode), c.splitting, c.n_tokens, c.heads, c.d_model, c.channels,
              c.scale_mode == AGV_SCALE_LINEAR ? "linear" : "sqrt");
  std::printf("# seed=%llu config_hash=%s\n",
              static_cast<unsigned long long>(agv_model_seed(model.get())),
              HashHex(agv_model_config_hash(model.get())).c_str());
  const size_t n = agv_model_tensor_count(model.get());
  for (size_t i = 0; i < n; ++i) {
    agv_tensor_info info;
    Check(agv_model_tensor_info(model.get(), i, &info), "inspect");
    std::string shape = "[";
    for (size_t k = 0; k < info.rank; ++k) {
      if (k) shape += "x";
      shape += std::to_string(info.shape[k]);
    }
    shape += "]";
    std::printf("%s\t%s\tmin=%s\tmax=%s\tmean=%s\n", info.name, shape.c_str(),
                FormatG9(info.min).c_str(), FormatG9(info.max).c_str(),
                FormatG9(info.mean).c_str());
  }
  return kExitOk;
}

// ---- embed ----------------------------------------------------------------

struct EmbedOptions {
  std::string manifest;
  std::string weights;
  std::string out_dir;
  std::string format = "json";
  uint64_t seed = 0;
  bool seed_given = false;
  bool keep_going = false;
  bool mel_stats = false;
};

int RunEmbed(const EmbedOptions& opt, const ConfigFlags& flags) {
  const std::vector<ManifestRecord> records = ReadManifest(opt.manifest);
  const bool binary = opt.format == "bin";
  const std::string ext = binary ? ".agve" : ".json";

  Model model;
  if (!opt.mel_stats) {
    if (!opt.weights.empty()) {
      model = LoadModel(opt.weights);
      agv_model_config wanted;
      agv_model_get_config(model.get(), &wanted);
      flags.ApplyTo(&wanted);
      Check(agv_model_check_config(model.get(), &wanted), opt.weights);
      if (opt.seed_given && agv_model_seed(model.get()) != opt.seed)
        Fail(kExitConfig, "--seed differs from the seed stored in " + opt.weights);
    } else {
      agv_model_config config;
      agv_model_config_default(&config);
      flags.ApplyTo(&config);
      agv_model* raw = nullptr;
      Check(agv_model_init(&config, opt.seed, &raw), "init");
      model.reset(raw);
    }
  } else if (flags.AnyGiven() || !opt.weights.empty()) {
    Fail(kExitConfig, "--mel-stats takes no model flags");
  }

  const fs::path out_dir = opt.out_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) Fail(kExitInput, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::string> files(records.size());
  std::set<std::string> stems;
  for (size_t i = 0; i < records.size(); ++i) {
    files[i] = SafeFileStem(records[i].utterance_id) + ext;
    if (!stems.insert(files[i]).second)
      Fail(kExitInput, "utterance ids collide on file name " + files[i]);
  }

  struct Outcome {
    agv_status status = AGV_OK;
    std::string error;
  };
  std::vector<Outcome> outcomes(records.size());
  ParallelFor(records.size(), [&](size_t i) {
    Outcome& o = outcomes[i];
    const std::string path = records[i].path.string();
    agv_audio* audio = nullptr;
    o.status = agv_audio_read_wav(path.c_str(), &audio);
    if (o.status != AGV_OK) {
      o.error = agv_last_error();
      return;
    }
    Audio owned(audio);
    agv_embedding* e = nullptr;
    o.status = opt.mel_stats ? agv_mel_stats_embedding(audio, &e) : agv_embed(model.get(), audio, &e);
    if (o.status != AGV_OK) {
      o.error = agv_last_error();
      return;
    }
    Embedding emb(e);
    const std::string target = (out_dir / files[i]).string();
    o.status = agv_embedding_save(e, target.c_str(), binary ? 1 : 0);
    if (o.status != AGV_OK) o.error = agv_last_error();
  });

  json entries = json::array();
  json failures = json::array();
  int worst = kExitOk;
  for (size_t i = 0; i < records.size(); ++i) {
    const ManifestRecord& r = records[i];
    if (outcomes[i].status != AGV_OK) {
      std::fprintf(stderr, "agv: %s (%s): %s\n", r.utterance_id.c_str(), r.path.c_str(),
                   outcomes[i].error.c_str());
      failures.push_back({{"utterance_id", r.utterance_id}, {"error", outcomes[i].error}});
      if (worst == kExitOk) worst = ExitCodeFor(outcomes[i].status);
      continue;
    }
    entries.push_back({{"utterance_id", r.utterance_id},
                       {"speaker_id", r.speaker_id},
                       {"language", r.language},
                       {"file", files[i]}});
  }
  if (worst != kExitOk && !opt.keep_going)
    Fail(worst, "embedding failed; rerun with --keep-going to skip bad files");
  if (entries.empty()) Fail(kExitInput, "no utterance could be embedded");

  json index;
  if (opt.mel_stats) {
    index["embedder"] = "mel-stats";
  } else {
    agv_model_config c;
    agv_model_get_config(model.get(), &c);
    index["embedder"] = "model";
    index["mode"] = agv_mode_name(c.mode);
    index["splitting"] = c.splitting != 0;
    index["config_hash"] = HashHex(agv_model_config_hash(model.get()));
    index["seed"] = agv_model_seed(model.get());
  }
  index["format"] = binary ? "bin" : "json";
  index["entries"] = std::move(entries);
  index["failures"] = std::move(failures);
  const fs::path index_path = out_dir / "index.json";
  WriteAtomic(index_path, index.dump(2) + "\n");
  std::printf("embedded %zu of %zu utterances -> %s\n", index["entries"].size(), records.size(),
              index_path.c_str());
  return kExitOk;
}

// ---- index reading --------------------------------------------------------

struct IndexEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string language;
  Embedding embedding;
};

std::vector<IndexEntry> ReadIndex(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(kExitInput, "cannot open index " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    Fail(kExitInput, path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  std::vector<IndexEntry> out;
  try {
    for (const json& e : j.at("entries")) {
      IndexEntry entry;
      entry.utterance_id = e.at("utterance_id").get<std::string>();
      entry.speaker_id = e.value("speaker_id", std::string());
      entry.language = e.value("language", std::string());
      fs::path file = e.at("file").get<std::string>();
      entry.embedding = LoadEmbedding((file.is_absolute() ? file : base / file).string());
      out.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    Fail(kExitInput, path + ": " + e.what());
  }
  return out;
}

void RequireSameDim(const std::vector<const agv_embedding*>& items) {
  for (const agv_embedding* e : items)
    if (agv_embedding_dim(e) != agv_embedding_dim(items.front()))
      Fail(kExitConfig, "embeddings differ in dimension (" +
                            std::to_string(agv_embedding_dim(items.front())) + " vs " +
                            std::to_string(agv_embedding_dim(e)) + ")");
}

// ---- simmatrix ------------------------------------------------------------

int RunSimmatrix(const std::string& index_path, const std::string& group_by,
                 const std::string& out_prefix) {
  std::vector<IndexEntry> entries = ReadIndex(index_path);
  if (entries.size() < 2) Fail(kExitInput, "simmatrix needs at least two embeddings");
  std::vector<Embedding> owned;
  for (IndexEntry& e : entries) owned.push_back(std::move(e.embedding));
  const std::vector<const agv_embedding*> all = Raw(owned);
  RequireSameDim(all);

  auto label_of = [&](const IndexEntry& e) {
    return group_by == "language" ? e.language : e.speaker_id;
  };

  std::vector<const agv_embedding*> rows, cols;
  std::vector<std::string> row_ids, col_ids, row_labels, col_labels;
  std::vector<Embedding> pooled;
  bool exclude_self = false;
  if (group_by.empty()) {
    rows = cols = all;
    for (const IndexEntry& e : entries) {
      row_ids.push_back(e.utterance_id);
      row_labels.push_back(e.speaker_id);
    }
    col_ids = row_ids;
    col_labels = row_labels;
    exclude_self = true;
  } else {
    // Each group is split into two disjoint halves, pooled separately, so the
    // diagonal compares different utterances of the same group.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const agv_embedding*>> members;
    for (size_t i = 0; i < entries.size(); ++i) {
      const std::string g = label_of(entries[i]);
      if (!members.count(g)) order.push_back(g);
      members[g].push_back(all[i]);
    }
    if (order.size() < 2) Fail(kExitInput, "--group-by " + group_by + " yields a single group");
    auto mean_of = [&](const agv_embedding* const* items, size_t n) {
      agv_embedding* e = nullptr;
      Check(agv_embedding_mean(items, n, &e), "group mean");
      pooled.emplace_back(e);
      return static_cast<const agv_embedding*>(e);
    };
    for (const std::string& g : order) {
      const auto& m = members[g];
      if (m.size() == 1) {
        rows.push_back(m[0]);
        cols.push_back(m[0]);
      } else {
        const size_t half = (m.size() + 1) / 2;
        rows.push_back(mean_of(m.data(), half));
        cols.push_back(mean_of(m.data() + half, m.size() - half));
      }
      row_ids.push_back(g);
      col_ids.push_back(g);
    }
    row_labels = row_ids;
    col_labels = col_ids;
  }

  agv_matrix* raw = nullptr;
  Check(agv_cross_similarity(rows.data(), rows.size(), cols.data(), cols.size(), &raw),
        "similarity");
  Matrix m(raw);
  const auto rid = CStrings(row_ids), cid = CStrings(col_ids);
  const auto rl = CStrings(row_labels), cl = CStrings(col_labels);
  double dominance = 0.0;
  Check(agv_diagonal_dominance(m.get(), rl.data(), cl.data(), exclude_self ? rid.data() : nullptr,
                               exclude_self ? cid.data() : nullptr, &dominance),
        "dominance");
  const std::string csv = out_prefix + ".csv", pgm = out_prefix + ".pgm";
  Check(agv_write_similarity_csv(m.get(), rid.data(), cid.data(), csv.c_str()), csv);
  Check(agv_write_similarity_pgm(m.get(), pgm.c_str()), pgm);
  std::printf("matrix %zux%zu -> %s, %s\n", agv_matrix_rows(m.get()), agv_matrix_cols(m.get()),
              csv.c_str(), pgm.c_str());
  std::printf("diagonal_dominance=%s\n", FormatG9(dominance).c_str());
  return kExitOk;
}

// ---- abx ------------------------------------------------------------------

int RunAbx(const std::string& reference, const std::string& index_path,
           const std::vector<std::string>& candidate_files) {
  Embedding ref = LoadEmbedding(reference);
  std::vector<Embedding> owned;
  std::vector<std::string> names;
  if (!index_path.empty()) {
    for (IndexEntry& e : ReadIndex(index_path)) {
      names.push_back(e.utterance_id);
      owned.push_back(std::move(e.embedding));
    }
  }
  for (const std::string& f : candidate_files) {
    names.push_back(fs::path(f).stem().string());
    owned.push_back(LoadEmbedding(f));
  }
  if (owned.size() < 2) Fail(kExitInput, "abx needs at least two candidates");
  std::vector<const agv_embedding*> items = Raw(owned);
  items.push_back(ref.get());
  RequireSameDim(items);
  items.pop_back();
  size_t chosen = 0;
  Check(agv_abx_select(ref.get(), items.data(), items.size(), &chosen), "abx");
  for (size_t i = 0; i < items.size(); ++i) {
    double c = 0.0;
    Check(agv_cosine(ref.get(), items[i], &c), "abx");
    std::fprintf(stderr, "%s\t%s\n", names[i].c_str(), FormatG9(c).c_str());
  }
  std::printf("%s\n", names[chosen].c_str());
  return kExitOk;
}

// ---- dumps ----------------------------------------------------------------

int RunMel(const std::string& path) {
  Audio audio = LoadCanonical(path);
  agv_matrix* raw = nullptr;
  Check(agv_mel_spectrogram(audio.get(), &raw), path);
  Matrix m(raw);
  const size_t rows = agv_matrix_rows(m.get()), cols = agv_matrix_cols(m.get());
  const double* d = agv_matrix_data(m.get());
  std::string out;
  for (size_t t = 0; t < rows; ++t) {
    for (size_t k = 0; k < cols; ++k) {
      if (k) out += ',';
      out += FormatG9(d[t * cols + k]);
    }
    out += '\n';
  }
  std::fwrite(out.data(), 1, out.size(), stdout);
  return kExitOk;
}

int RunF0(const std::string& path) {
  Audio audio = LoadCanonical(path);
  agv_matrix* raw = nullptr;
  Check(agv_f0_contour(audio.get(), &raw), path);
  Matrix m(raw);
  const double* d = agv_matrix_data(m.get());
  std::string out = "frame_index,f0_hz,voiced,cmnd_min\n";
  for (size_t t = 0; t < agv_matrix_rows(m.get()); ++t) {
    out += std::to_string(t) + ',' + FormatG9(d[3 * t]) + ',' +
           (d[3 * t + 1] != 0.0 ? "1" : "0") + ',' + FormatG9(d[3 * t + 2]) + '\n';
  }
  std::fwrite(out.data(), 1, out.size(), stdout);
  return kExitOk;
}

// ---- selftest / synth -----------------------------------------------------

int RunSelftest(const std::string& weights, const std::string& manifest) {
  std::vector<std::string> paths;
  if (!manifest.empty())
    for (const ManifestRecord& r : ReadManifest(manifest)) paths.push_back(r.path.string());
  const auto cpaths = CStrings(paths);
  char* report = nullptr;
  const agv_status s = agv_selftest(weights.empty() ? nullptr : weights.c_str(), cpaths.data(),
                                    cpaths.size(), &report);
  if (report) {
    std::fputs(report, stdout);
    agv_string_free(report);
  }
  if (s == AGV_OK) {
    std::printf("PASS\n");
    return kExitOk;
  }
  std::printf("FAIL %s\n", agv_last_error());
  return s == AGV_ERR_CHECK_FAILED ? kExitInternal : ExitCodeFor(s);
}

int RunSynth(double f0, double tilt, double seconds, uint64_t seed, const std::string& out) {
  agv_audio* raw = nullptr;
  Check(agv_synth_voice(f0, tilt, seconds, seed, &raw), "synth");
  Audio audio(raw);
  Check(agv_audio_write_wav(audio.get(), out.c_str()), out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agv: multi-level attention speaker embeddings"};
  app.require_subcommand(1);

  ConfigFlags init_flags, embed_flags;
  uint64_t seed = 0;
  std::string out, weights, manifest, index, group_by, reference, audio_path, format = "json";
  std::vector<std::string> candidates;
  bool keep_going = false, mel_stats = false;
  double f0 = 150.0, tilt = -6.0, seconds = 1.0;

  CLI::App* init = app.add_subcommand("init", "write a seeded weight file");
  init_flags.Register(init);
  init->add_option("--seed", seed, "initialisation seed");
  init->add_option("--out", out, "weight file to write")->required();

  CLI::App* inspect = app.add_subcommand("inspect", "list tensors in a weight file");
  inspect->add_option("--weights,weights", weights, "weight file")->required();

  CLI::App* embed = app.add_subcommand("embed", "embed every utterance in a manifest");
  embed_flags.Register(embed);
  embed->add_option("--manifest,manifest", manifest, "JSONL manifest")->required();
  embed->add_option("--weights", weights, "weight file (default: initialise from --seed)");
  CLI::Option* embed_seed = embed->add_option("--seed", seed, "initialisation seed");
  embed->add_option("--out", out, "output directory")->required();
  embed->add_option("--format", format, "json | bin")->check(CLI::IsMember({"json", "bin"}));
  embed->add_flag("--keep-going", keep_going, "skip files that fail");
  embed->add_flag("--mel-stats", mel_stats, "use the weight-free mel statistics embedding");

  CLI::App* mel = app.add_subcommand("mel", "dump the log-mel spectrogram as CSV");
  mel->add_option("audio", audio_path, "WAV file")->required();
  CLI::App* f0cmd = app.add_subcommand("f0", "dump the F0 contour as CSV");
  f0cmd->add_option("audio", audio_path, "WAV file")->required();

  CLI::App* sim = app.add_subcommand("simmatrix", "cross-similarity matrix from an index");
  sim->add_option("--index,index", index, "index.json written by embed")->required();
  sim->add_option("--group-by", group_by, "speaker | language")
      ->check(CLI::IsMember({"speaker", "language"}));
  sim->add_option("--out", out, "output prefix (writes PREFIX.csv and PREFIX.pgm)")->required();

  CLI::App* abx = app.add_subcommand("abx", "pick the candidate closest to a reference");
  abx->add_option("--reference", reference, "reference embedding")->required();
  abx->add_option("--index", index, "candidates from an index.json");
  abx->add_option("--candidates", candidates, "candidate embedding files");

  CLI::App* selftest = app.add_subcommand("selftest", "gradient, DSP and serialization checks");
  selftest->add_option("--weights", weights, "weight file to check");
  selftest->add_option("--manifest", manifest, "audio files to include");

  CLI::App* synth = app.add_subcommand("synth", "write a synthetic voice-like tone");
  synth->add_option("--f0", f0, "fundamental in Hz")->check(CLI::PositiveNumber);
  synth->add_option("--tilt", tilt, "spectral tilt in dB per octave");
  synth->add_option("--seconds", seconds, "duration")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "noise seed");
  synth->add_option("--out", out, "WAV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*init) return RunInit(init_flags, seed, out);
    if (*inspect) return RunInspect(weights);
    if (*embed) {
      EmbedOptions opt;
      opt.manifest = manifest;
      opt.weights = weights;
      opt.out_dir = out;
      opt.format = format;
      opt.seed = seed;
      opt.seed_given = embed_seed->count() > 0;
      opt.keep_going = keep_going;
      opt.mel_stats = mel_stats;
      return RunEmbed(opt, embed_flags);
    }
    if (*mel) return RunMel(audio_path);
    if (*f0cmd) return RunF0(audio_path);
    if (*sim) return RunSimmatrix(index, group_by, out);
    if (*abx) return RunAbx(reference, index, candidates);
    if (*selftest) return RunSelftest(weights, manifest);
    if (*synth) return RunSynth(f0, tilt, seconds, seed, out);
  } catch (const Failure& f) {
    std::fprintf(stderr, "agv: %s\n", f.message.c_str());
    return f.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "agv: internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
