#include "pcrnn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <json.hpp>

namespace pcrnn {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'C', 'R', 'N'};

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw SchemaError(std::string("checkpoint: truncated reading ") + what);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_raw<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, const char* what) {
  const auto len = read_raw<std::uint64_t>(in, what);
  if (len > (1u << 20)) throw SchemaError(std::string("checkpoint: implausible length for ") + what);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw SchemaError(std::string("checkpoint: truncated reading ") + what);
  return s;
}

void write_floats(std::ostream& out, const std::vector<float>& v) {
  write_raw<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> read_floats(std::istream& in, const char* what) {
  const auto n = read_raw<std::uint64_t>(in, what);
  if (n > (1u << 28)) throw SchemaError(std::string("checkpoint: implausible size for ") + what);
  std::vector<float> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw SchemaError(std::string("checkpoint: truncated reading ") + what);
  return v;
}

json config_to_json(const ModelConfig& c) {
  return json{{"d_p", c.d_p},           {"d_a", c.d_a},
              {"d_v", c.d_v},           {"emb_dim", c.emb_dim},
              {"attn_dim", c.attn_dim}, {"pfn_inner", c.pfn_inner},
              {"stack", c.stack},       {"vocab", c.vocab},
              {"max_seq_len", c.max_seq_len},
              {"task", task_name(c.task)}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.d_p = j.at("d_p").get<int>();
  c.d_a = j.at("d_a").get<int>();
  c.d_v = j.at("d_v").get<int>();
  c.emb_dim = j.at("emb_dim").get<int>();
  c.attn_dim = j.at("attn_dim").get<int>();
  c.pfn_inner = j.at("pfn_inner").get<int>();
  c.stack = j.at("stack").get<int>();
  c.vocab = j.at("vocab").get<int>();
  c.max_seq_len = j.at("max_seq_len").get<int>();
  const auto task = j.at("task").get<std::string>();
  if (task != "main" && task != "sub")
    throw SchemaError("checkpoint: unknown task '" + task + "'");
  c.task = task == "main" ? Task::main_category : Task::sub_category;
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const PcrnnModel<float>& model,
                     const Normalization& norm, std::uint64_t seed, const Adam<float>* optimizer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("checkpoint: cannot write " + path);
  out.write(kMagic, 4);
  write_raw<std::uint32_t>(out, kCheckpointVersion);
  write_string(out, config_to_json(model.cfg).dump());
  write_raw<double>(out, norm.t_min);
  write_raw<double>(out, norm.t_max);
  write_raw<std::uint64_t>(out, seed);

  const auto params = model.parameters();
  write_raw<std::uint64_t>(out, params.size());
  for (const auto& [name, p] : params) {
    write_string(out, name);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(p.shape.size()));
    for (int d : p.shape) write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    write_floats(out, *p.data);
  }

  write_raw<std::uint8_t>(out, optimizer ? 1 : 0);
  if (optimizer) {
    write_raw<std::int64_t>(out, optimizer->step_count());
    const auto& cfg = optimizer->config();
    write_raw<double>(out, cfg.lr);
    write_raw<double>(out, cfg.beta1);
    write_raw<double>(out, cfg.beta2);
    write_raw<double>(out, cfg.eps);
    write_raw<double>(out, cfg.clip_norm);
    for (const auto& m : optimizer->first_moments()) write_floats(out, m);
    for (const auto& v : optimizer->second_moments()) write_floats(out, v);
  }
  if (!out) throw SchemaError("checkpoint: write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw SchemaError("checkpoint: " + path + " is not a model checkpoint");
  const auto version = read_raw<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw SchemaError("checkpoint: version " + std::to_string(version) + " unsupported (want " +
                      std::to_string(kCheckpointVersion) + ")");
  const auto cfg_text = read_string(in, "config");
  json cfg_json = json::parse(cfg_text, nullptr, false);
  if (cfg_json.is_discarded()) throw SchemaError("checkpoint: bad config block");

  LoadedCheckpoint loaded;
  loaded.model = PcrnnModel<float>::init(config_from_json(cfg_json), 0);
  loaded.norm.t_min = read_raw<double>(in, "t_min");
  loaded.norm.t_max = read_raw<double>(in, "t_max");
  loaded.seed = read_raw<std::uint64_t>(in, "seed");

  const auto params = loaded.model.parameters();
  const auto count = read_raw<std::uint64_t>(in, "parameter count");
  if (count != params.size())
    throw SchemaError("checkpoint: holds " + std::to_string(count) + " tensors, model needs " +
                      std::to_string(params.size()));
  for (const auto& [name, p] : params) {
    const auto stored_name = read_string(in, "parameter name");
    if (stored_name != name)
      throw SchemaError("checkpoint: tensor '" + stored_name + "' where '" + name + "' expected");
    const auto ndim = read_raw<std::uint32_t>(in, "rank");
    std::vector<int> shape(ndim);
    for (auto& d : shape) d = static_cast<int>(read_raw<std::uint32_t>(in, "dimension"));
    if (shape != p.shape)
      throw SchemaError("checkpoint: tensor '" + name + "' has an unexpected shape");
    auto values = read_floats(in, name.c_str());
    if (values.size() != p.numel())
      throw SchemaError("checkpoint: tensor '" + name + "' has the wrong element count");
    *p.data = std::move(values);
  }

  loaded.has_optimizer = read_raw<std::uint8_t>(in, "optimizer flag") != 0;
  if (loaded.has_optimizer) {
    loaded.adam_step = read_raw<std::int64_t>(in, "optimizer step");
    loaded.adam_config.lr = read_raw<double>(in, "lr");
    loaded.adam_config.beta1 = read_raw<double>(in, "beta1");
    loaded.adam_config.beta2 = read_raw<double>(in, "beta2");
    loaded.adam_config.eps = read_raw<double>(in, "eps");
    loaded.adam_config.clip_norm = read_raw<double>(in, "clip_norm");
    for (std::size_t i = 0; i < params.size(); ++i)
      loaded.adam_m.push_back(read_floats(in, "first moment"));
    for (std::size_t i = 0; i < params.size(); ++i)
      loaded.adam_v.push_back(read_floats(in, "second moment"));
  }
  return loaded;
}

}  // namespace pcrnn
