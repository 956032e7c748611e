#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aaerec/error.hpp"
#include "aaerec/recommenders.hpp"

namespace aaerec {

namespace {

constexpr const char* kFormat = "aaerec-checkpoint";
constexpr int kVersion = 1;

std::string exact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error("checkpoint: setting '" + key + "' is not a number: '" + text + "'");
  }
  return x;
}

std::size_t parse_size(const std::string& text, const std::string& key) {
  std::size_t pos = 0;
  try {
    const auto v = std::stoull(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw Error("checkpoint: setting '" + key + "' is not a count: '" + text + "'");
}

DenseMatrix row_vector(const std::vector<double>& v) { return DenseMatrix(1, v.size(), v); }

void put_mlp(Checkpoint& ckpt, const std::string& prefix, const Mlp2& net) {
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& layer = net.layers[i];
    const std::string p = prefix + ".l" + std::to_string(i);
    ckpt.config.emplace_back(p + ".activation", to_string(layer.activation));
    ckpt.config.emplace_back(p + ".dropout", exact(layer.dropout_p));
    ckpt.tensors.push_back({p + ".w", layer.w});
    ckpt.tensors.push_back({p + ".b", row_vector(layer.b)});
  }
}

Mlp2 get_mlp(const Checkpoint& ckpt, const std::string& prefix) {
  Mlp2 net;
  for (std::size_t i = 0; i < 3; ++i) {
    auto& layer = net.layers[i];
    const std::string p = prefix + ".l" + std::to_string(i);
    layer.activation = parse_activation(ckpt.setting(p + ".activation"));
    layer.dropout_p = parse_double(ckpt.setting(p + ".dropout"), p + ".dropout");
    layer.w = ckpt.tensor(p + ".w");
    const auto& b = ckpt.tensor(p + ".b");
    if (b.rows() != 1 || b.cols() != layer.w.cols()) {
      throw ShapeError("checkpoint: bias " + p + ".b is " + shape_string(b) + " for weights " +
                       shape_string(layer.w));
    }
    layer.b.assign(b.values().begin(), b.values().end());
    if (i > 0 && layer.w.rows() != net.layers[i - 1].w.cols()) {
      throw ShapeError("checkpoint: layer " + p + " does not chain with its predecessor");
    }
  }
  return net;
}

void expect_model(const Checkpoint& ckpt, ModelKind kind) {
  if (ckpt.model != to_string(kind)) {
    throw Error("checkpoint holds a '" + ckpt.model + "' model, expected '" + to_string(kind) + "'");
  }
}

}  // namespace

const DenseMatrix& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw Error("checkpoint: missing tensor '" + name + "'");
}

const std::string& Checkpoint::setting(const std::string& key) const {
  for (const auto& [k, v] : config)
    if (k == key) return v;
  throw Error("checkpoint: missing setting '" + key + "'");
}

std::string Checkpoint::serialize() const {
  nlohmann::ordered_json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["model"] = model;
  auto cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  doc["config"] = cfg;
  auto list = nlohmann::ordered_json::array();
  for (const auto& t : tensors) {
    nlohmann::ordered_json j;
    j["name"] = t.name;
    j["rows"] = t.value.rows();
    j["cols"] = t.value.cols();
    j["values"] = std::vector<double>(t.value.values().begin(), t.value.values().end());
    list.push_back(std::move(j));
  }
  doc["tensors"] = std::move(list);
  return doc.dump();
}

Checkpoint Checkpoint::parse(const std::string& text) {
  try {
    const auto doc = nlohmann::ordered_json::parse(text);
    if (doc.value("format", std::string{}) != kFormat) throw Error("checkpoint: unrecognised format");
    if (doc.at("version").get<int>() != kVersion) {
      throw Error("checkpoint: unsupported version " + doc.at("version").dump());
    }
    Checkpoint ckpt;
    ckpt.model = doc.at("model").get<std::string>();
    for (const auto& [k, v] : doc.at("config").items()) ckpt.config.emplace_back(k, v.get<std::string>());
    for (const auto& j : doc.at("tensors")) {
      const auto rows = j.at("rows").get<std::size_t>();
      const auto cols = j.at("cols").get<std::size_t>();
      auto values = j.at("values").get<std::vector<double>>();
      if (values.size() != rows * cols) {
        throw ShapeError("checkpoint: tensor '" + j.at("name").get<std::string>() + "' has " +
                         std::to_string(values.size()) + " values for " + std::to_string(rows) + "x" +
                         std::to_string(cols));
      }
      ckpt.tensors.push_back({j.at("name").get<std::string>(), DenseMatrix(rows, cols, std::move(values))});
    }
    return ckpt;
  } catch (const nlohmann::ordered_json::exception& e) {
    throw Error(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint '" + path.string() + "'");
  out << serialize();
  if (!out.flush()) throw Error("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

// ---------------------------------------------------------------------------

Checkpoint CoocModel::checkpoint() const {
  Checkpoint c;
  c.model = to_string(kind());
  c.tensors.push_back({"cooccurrence", cooccurrence_});
  return c;
}

CoocModel CoocModel::restore(const Checkpoint& ckpt) {
  expect_model(ckpt, ModelKind::Cooc);
  CoocModel m;
  m.cooccurrence_ = ckpt.tensor("cooccurrence");
  if (m.cooccurrence_.rows() != m.cooccurrence_.cols()) throw ShapeError("checkpoint: cooc matrix not square");
  return m;
}

Checkpoint SvdModel::checkpoint() const {
  Checkpoint c;
  c.model = to_string(kind());
  c.config.emplace_back("n_items", std::to_string(n_items_));
  c.config.emplace_back("title_cols", std::to_string(title_cols_));
  c.config.emplace_back("multimodal", multimodal_ ? "true" : "false");
  c.tensors.push_back({"sigma", row_vector(sigma_)});
  c.tensors.push_back({"vt", vt_});
  return c;
}

SvdModel SvdModel::restore(const Checkpoint& ckpt) {
  expect_model(ckpt, ModelKind::Svd);
  SvdModel m;
  m.n_items_ = parse_size(ckpt.setting("n_items"), "n_items");
  m.title_cols_ = parse_size(ckpt.setting("title_cols"), "title_cols");
  m.multimodal_ = ckpt.setting("multimodal") == "true";
  const auto& sigma = ckpt.tensor("sigma");
  m.sigma_.assign(sigma.values().begin(), sigma.values().end());
  m.vt_ = ckpt.tensor("vt");
  if (m.vt_.cols() != m.n_items_ + m.title_cols_ || m.vt_.rows() != m.sigma_.size()) {
    throw ShapeError("checkpoint: svd factors do not match the stored sizes");
  }
  return m;
}

Checkpoint MlpModel::checkpoint() const {
  Checkpoint c;
  c.model = to_string(kind());
  put_mlp(c, "net", net_);
  return c;
}

MlpModel MlpModel::restore(const Checkpoint& ckpt) {
  expect_model(ckpt, ModelKind::Mlp);
  MlpModel m;
  m.net_ = get_mlp(ckpt, "net");
  return m;
}

Checkpoint AeModel::checkpoint() const {
  Checkpoint c;
  c.model = to_string(kind());
  c.config.emplace_back("title_dim", std::to_string(title_dim_));
  put_mlp(c, "encoder", encoder_);
  put_mlp(c, "decoder", decoder_);
  return c;
}

AeModel AeModel::restore(const Checkpoint& ckpt) {
  expect_model(ckpt, ModelKind::Ae);
  AeModel m;
  m.title_dim_ = parse_size(ckpt.setting("title_dim"), "title_dim");
  m.encoder_ = get_mlp(ckpt, "encoder");
  m.decoder_ = get_mlp(ckpt, "decoder");
  if (m.decoder_.in_dim() != m.encoder_.out_dim() + m.title_dim_) {
    throw ShapeError("checkpoint: decoder input does not match code + title sizes");
  }
  return m;
}

Checkpoint AaeModel::checkpoint() const {
  Checkpoint c;
  c.model = to_string(kind());
  c.config.emplace_back("title_dim", std::to_string(title_dim_));
  put_mlp(c, "encoder", encoder_);
  put_mlp(c, "decoder", decoder_);
  put_mlp(c, "discriminator", discriminator_);
  return c;
}

AaeModel AaeModel::restore(const Checkpoint& ckpt) {
  expect_model(ckpt, ModelKind::Aae);
  AaeModel m;
  m.title_dim_ = parse_size(ckpt.setting("title_dim"), "title_dim");
  m.encoder_ = get_mlp(ckpt, "encoder");
  m.decoder_ = get_mlp(ckpt, "decoder");
  m.discriminator_ = get_mlp(ckpt, "discriminator");
  if (m.decoder_.in_dim() != m.encoder_.out_dim() + m.title_dim_ ||
      m.discriminator_.in_dim() != m.encoder_.out_dim()) {
    throw ShapeError("checkpoint: aae networks do not chain");
  }
  return m;
}

std::unique_ptr<Recommender> restore_model(const Checkpoint& ckpt) {
  switch (parse_model_kind(ckpt.model)) {
    case ModelKind::Cooc: return std::make_unique<CoocModel>(CoocModel::restore(ckpt));
    case ModelKind::Svd: return std::make_unique<SvdModel>(SvdModel::restore(ckpt));
    case ModelKind::Mlp: return std::make_unique<MlpModel>(MlpModel::restore(ckpt));
    case ModelKind::Ae: return std::make_unique<AeModel>(AeModel::restore(ckpt));
    case ModelKind::Aae: return std::make_unique<AaeModel>(AaeModel::restore(ckpt));
  }
  throw Error("restore_model: unknown model kind");
}

}  // namespace aaerec
