#include "dstlab/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dstlab/common.hpp"

namespace dstlab {

std::vector<MaskableLayer> maskable_layers(const NetworkState& net) {
  std::vector<MaskableLayer> out;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    if (!l.parametric()) continue;
    MaskableLayer m;
    m.name = "layer" + std::to_string(i);
    m.net_layer = i;
    m.shape = net.weights[i].shape;
    m.fan_in = l.in;
    m.fan_out = l.out;
    if (l.kind == LayerKind::Conv2d) m.kw = m.kh = l.kernel;
    m.size = net.weights[i].size();
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<size_t> MaskLayer::active_indices() const {
  std::vector<size_t> out;
  out.reserve(active_count);
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(i);
  return out;
}

std::vector<size_t> MaskLayer::inactive_indices() const {
  std::vector<size_t> out;
  out.reserve(bits.size() - active_count);
  for (size_t i = 0; i < bits.size(); ++i)
    if (!bits[i]) out.push_back(i);
  return out;
}

size_t Mask::total_size() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.size();
  return n;
}

size_t Mask::total_active() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.active_count;
  return n;
}

Mask full_mask_for(const NetworkState& net) {
  Mask mask;
  for (const MaskableLayer& m : maskable_layers(net)) {
    MaskLayer l;
    l.name = m.name;
    l.shape = m.shape;
    l.bits.assign(m.size, 1);
    l.active_count = m.size;
    mask.layers.push_back(std::move(l));
    mask.net_layer_index.push_back(m.net_layer);
  }
  return mask;
}

void apply_mask(NetworkState& net, const Mask& mask) {
  for (size_t li = 0; li < mask.layers.size(); ++li) {
    Tensor& w = net.weights[mask.net_layer_index[li]];
    const MaskLayer& m = mask.layers[li];
    for (size_t i = 0; i < m.size(); ++i)
      if (!m.bits[i]) w.data[i] = 0.0;
  }
}

namespace {

double er_scale(const MaskableLayer& m) {
  return (static_cast<double>(m.fan_in) + static_cast<double>(m.fan_out)) /
         (static_cast<double>(m.fan_in) * static_cast<double>(m.fan_out));
}

double erk_scale(const MaskableLayer& m) {
  if (m.kw == 0) return er_scale(m);
  const double n_in = static_cast<double>(m.fan_in), n_out = static_cast<double>(m.fan_out);
  const double w = static_cast<double>(m.kw), h = static_cast<double>(m.kh);
  return (n_in + n_out + w + h) / (n_in * n_out * w * h);
}

SparsityPlan allocate(const std::vector<MaskableLayer>& layers, double D, bool kernel_aware) {
  if (!(D > 0.0 && D <= 1.0)) throw config_error("density must be in (0, 1]");
  if (layers.empty()) throw config_error("no maskable layers to allocate");

  SparsityPlan plan;
  plan.layers = layers;
  plan.target = D;
  plan.density.assign(layers.size(), 0.0);

  std::vector<double> scale(layers.size());
  for (size_t i = 0; i < layers.size(); ++i)
    scale[i] = kernel_aware ? erk_scale(layers[i]) : er_scale(layers[i]);

  size_t total = 0;
  for (const auto& l : layers) total += l.size;
  const double target_params = D * static_cast<double>(total);

  // Clamp-and-redistribute fixpoint: solve eps over unclamped layers, clamp
  // anything that lands above density 1, repeat.
  std::vector<bool> clamped(layers.size(), false);
  for (;;) {
    double clamped_params = 0.0;
    double scale_mass = 0.0;
    size_t free_layers = 0;
    for (size_t i = 0; i < layers.size(); ++i) {
      if (clamped[i]) {
        clamped_params += static_cast<double>(layers[i].size);
      } else {
        scale_mass += scale[i] * static_cast<double>(layers[i].size);
        ++free_layers;
      }
    }
    if (free_layers == 0) {
      if (clamped_params + 0.5 < target_params)
        throw config_error("infeasible density: all layers clamped below the requested density");
      break;
    }
    const double eps = (target_params - clamped_params) / scale_mass;
    bool changed = false;
    for (size_t i = 0; i < layers.size(); ++i) {
      if (clamped[i]) continue;
      if (eps * scale[i] > 1.0) {
        clamped[i] = true;
        changed = true;
      }
    }
    if (!changed) {
      for (size_t i = 0; i < layers.size(); ++i)
        plan.density[i] = clamped[i] ? 1.0 : eps * scale[i];
      break;
    }
  }
  for (size_t i = 0; i < layers.size(); ++i)
    if (clamped[i]) plan.density[i] = 1.0;
  return plan;
}

}  // namespace

SparsityPlan er_allocate(const std::vector<MaskableLayer>& layers, double D) {
  return allocate(layers, D, false);
}

SparsityPlan erk_allocate(const std::vector<MaskableLayer>& layers, double D) {
  return allocate(layers, D, true);
}

std::vector<size_t> plan_active_counts(const SparsityPlan& plan) {
  std::vector<size_t> counts(plan.layers.size());
  size_t total = 0;
  size_t largest = 0;
  long long sum = 0;
  for (size_t i = 0; i < plan.layers.size(); ++i) {
    const size_t n = plan.layers[i].size;
    counts[i] = static_cast<size_t>(std::llround(plan.density[i] * static_cast<double>(n)));
    counts[i] = std::min(counts[i], n);
    total += n;
    sum += static_cast<long long>(counts[i]);
    if (n > plan.layers[largest].size) largest = i;
  }
  const long long want = std::llround(plan.target * static_cast<double>(total));
  long long diff = want - sum;
  long long adjusted = static_cast<long long>(counts[largest]) + diff;
  adjusted = std::max(0ll, std::min(adjusted, static_cast<long long>(plan.layers[largest].size)));
  counts[largest] = static_cast<size_t>(adjusted);
  return counts;
}

Mask sample_mask(const SparsityPlan& plan, Rng& rng) {
  const std::vector<size_t> counts = plan_active_counts(plan);
  Mask mask;
  for (size_t li = 0; li < plan.layers.size(); ++li) {
    MaskLayer l;
    l.name = plan.layers[li].name;
    l.shape = plan.layers[li].shape;
    l.bits.assign(plan.layers[li].size, 0);
    for (size_t slot : rng.sample_slots(plan.layers[li].size, counts[li])) l.bits[slot] = 1;
    l.active_count = counts[li];
    mask.layers.push_back(std::move(l));
    mask.net_layer_index.push_back(plan.layers[li].net_layer);
  }
  return mask;
}

double global_density(const Mask& mask) {
  const size_t total = mask.total_size();
  return total == 0 ? 0.0 : static_cast<double>(mask.total_active()) / static_cast<double>(total);
}

double layer_density(const Mask& mask, size_t layer) {
  const MaskLayer& l = mask.layers.at(layer);
  return l.size() == 0 ? 0.0
                       : static_cast<double>(l.active_count) / static_cast<double>(l.size());
}

void ExplorationLedger::reset_from(const Mask& mask) {
  bits.clear();
  explored = 0;
  total = 0;
  for (const auto& l : mask.layers) {
    bits.push_back(l.bits);
    explored += l.active_count;
    total += l.size();
  }
}

void ExplorationLedger::absorb(const Mask& mask) {
  for (size_t li = 0; li < mask.layers.size(); ++li) {
    const auto& src = mask.layers[li].bits;
    auto& dst = bits[li];
    for (size_t i = 0; i < src.size(); ++i) {
      if (src[i] && !dst[i]) {
        dst[i] = 1;
        ++explored;
      }
    }
  }
}

double ExplorationLedger::itop_ratio() const {
  return total == 0 ? 0.0 : static_cast<double>(explored) / static_cast<double>(total);
}

MaskSnapshot MaskSnapshot::from_mask(const Mask& mask, uint64_t step, const std::string& criterion,
                                     const std::string& growth, uint64_t seed) {
  MaskSnapshot s;
  s.step = step;
  s.criterion = criterion;
  s.growth = growth;
  s.seed = seed;
  s.density = global_density(mask);
  for (const auto& l : mask.layers) {
    Layer out;
    out.name = l.name;
    out.shape = l.shape;
    out.active = l.active_indices();
    s.layers.push_back(std::move(out));
  }
  return s;
}

std::string MaskSnapshot::serialize() const {
  std::string out;
  out += "DSTLAB-MASK v1\n";
  out += "step " + std::to_string(step) + "\n";
  out += "criterion " + criterion + "\n";
  out += "growth " + growth + "\n";
  out += "seed " + std::to_string(seed) + "\n";
  out += "density " + format_double(density) + "\n";
  out += "layers " + std::to_string(layers.size()) + "\n";
  for (const Layer& l : layers) {
    std::string shape;
    for (size_t i = 0; i < l.shape.size(); ++i) {
      if (i) shape += "x";
      shape += std::to_string(l.shape[i]);
    }
    out += "layer " + l.name + " shape " + shape + " active " + std::to_string(l.active.size()) +
           "\n";
    for (size_t i = 0; i < l.active.size(); ++i) {
      if (i) out += " ";
      out += std::to_string(l.active[i]);
    }
    out += "\n";
  }
  return out;
}

namespace {

std::string next_line(std::istringstream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw format_error("truncated mask snapshot: " + origin);
  return line;
}

std::string expect_field(const std::string& line, const std::string& key,
                         const std::string& origin) {
  if (line.rfind(key + " ", 0) != 0)
    throw format_error("expected '" + key + "' line in " + origin + ", got '" + line + "'");
  return line.substr(key.size() + 1);
}

}  // namespace

MaskSnapshot MaskSnapshot::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  MaskSnapshot s;
  if (next_line(in, origin) != "DSTLAB-MASK v1")
    throw format_error("bad magic in mask snapshot: " + origin);
  s.step = static_cast<uint64_t>(parse_int(expect_field(next_line(in, origin), "step", origin),
                                           "snapshot step"));
  s.criterion = expect_field(next_line(in, origin), "criterion", origin);
  s.growth = expect_field(next_line(in, origin), "growth", origin);
  s.seed = static_cast<uint64_t>(parse_int(expect_field(next_line(in, origin), "seed", origin),
                                           "snapshot seed"));
  s.density = parse_double(expect_field(next_line(in, origin), "density", origin),
                           "snapshot density");
  const size_t n_layers = static_cast<size_t>(
      parse_int(expect_field(next_line(in, origin), "layers", origin), "layer count"));
  for (size_t li = 0; li < n_layers; ++li) {
    const std::string header = next_line(in, origin);
    std::istringstream hs(header);
    std::string tag, name, shape_tag, shape_str, active_tag;
    size_t active_count = 0;
    hs >> tag >> name >> shape_tag >> shape_str >> active_tag >> active_count;
    if (tag != "layer" || shape_tag != "shape" || active_tag != "active" || hs.fail())
      throw format_error("bad layer header in " + origin + ": '" + header + "'");
    Layer l;
    l.name = name;
    for (const std::string& part : split(shape_str, 'x'))
      l.shape.push_back(static_cast<size_t>(parse_int(part, "snapshot shape")));
    const size_t layer_size = shape_product(l.shape);
    const std::string idx_line = next_line(in, origin);
    std::istringstream is(idx_line);
    size_t v = 0;
    while (is >> v) {
      if (v >= layer_size)
        throw format_error("active index " + std::to_string(v) + " out of range in " + origin);
      l.active.push_back(v);
    }
    if (l.active.size() != active_count)
      throw format_error("active count mismatch in " + origin + " layer " + name);
    if (!std::is_sorted(l.active.begin(), l.active.end()))
      throw format_error("active indices not sorted in " + origin + " layer " + name);
    s.layers.push_back(std::move(l));
  }
  return s;
}

void MaskSnapshot::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write mask snapshot: " + path.string());
  const std::string text = serialize();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

MaskSnapshot MaskSnapshot::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read mask snapshot: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

}  // namespace dstlab
