// Copyright 2026 The qkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qkit/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <utility>

#include "qkit/errors.hpp"

namespace qkit::extraction {

namespace {

using Complex = std::complex<double>;

constexpr double kUnitaryTolerance = 1e-10;
constexpr double kNormTolerance = 1e-10;

std::size_t arity(GateKind kind) {
  switch (kind) {
    case GateKind::kCX:
      return 2;
    case GateKind::kCCX:
      return 3;
    default:
      return 1;
  }
}

const char* kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::kH:
      return "H";
    case GateKind::kX:
      return "X";
    case GateKind::kZ:
      return "Z";
    case GateKind::kCX:
      return "CX";
    case GateKind::kCCX:
      return "CCX";
    case GateKind::kU:
      return "U";
  }
  return "?";
}

GateKind kind_from_name(const std::string& name) {
  for (GateKind k : {GateKind::kH, GateKind::kX, GateKind::kZ, GateKind::kCX, GateKind::kCCX,
                     GateKind::kU}) {
    if (name == kind_name(k)) return k;
  }
  throw ValidationError("unknown gate '" + name + "' (allowed: H, X, Z, CX, CCX, U)");
}

Eigen::Matrix2cd target_matrix(const Gate& gate) {
  const double h = 1.0 / std::numbers::sqrt2;
  Eigen::Matrix2cd m;
  switch (gate.kind) {
    case GateKind::kH:
      m << h, h, h, -h;
      return m;
    case GateKind::kZ:
      m << 1, 0, 0, -1;
      return m;
    case GateKind::kU:
      return gate.u;
    default:
      m << 0, 1, 1, 0;
      return m;
  }
}

bool is_unitary(const Eigen::Matrix2cd& u) {
  if (!u.allFinite()) return false;
  return (u.adjoint() * u - Eigen::Matrix2cd::Identity()).norm() <= kUnitaryTolerance;
}

void check_qubits(const Gate& gate, std::size_t total, const char* where) {
  if (gate.qubits.size() != arity(gate.kind)) {
    throw ValidationError(std::string(where) + ": gate " + kind_name(gate.kind) + " takes " +
                          std::to_string(arity(gate.kind)) + " qubit(s)");
  }
  std::set<std::size_t> seen;
  for (std::size_t q : gate.qubits) {
    if (q >= total) {
      throw ValidationError(std::string(where) + ": qubit " + std::to_string(q) +
                            " out of range");
    }
    if (!seen.insert(q).second) {
      throw ValidationError(std::string(where) + ": repeated qubit in " + kind_name(gate.kind));
    }
  }
  if (gate.kind == GateKind::kU && !is_unitary(gate.u)) {
    throw ValidationError(std::string(where) + ": U matrix is not unitary");
  }
}

void check_circuit(const Circuit& circuit, std::size_t total, const char* where) {
  for (const Gate& g : circuit) check_qubits(g, total, where);
}

void check_unit(const Eigen::VectorXcd& v, std::size_t qubits, const char* name) {
  if (v.size() != (Eigen::Index{1} << qubits)) {
    throw ValidationError(std::string(name) + " must have 2^" + std::to_string(qubits) +
                          " amplitudes");
  }
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kNormTolerance) {
    throw ValidationError(std::string(name) + " is not a unit vector");
  }
}

std::vector<std::size_t> range_qubits(std::size_t begin, std::size_t count) {
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = begin + i;
  return out;
}

std::size_t sample_index(const std::vector<double>& dist, Rng& rng) {
  double total = 0.0;
  for (double p : dist) total += p;
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    acc += dist[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError("complex entries must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

// |x> (x register) tensor aux_init tensor |0> on the rest.
DenseState basis_input(const InnerProductQuery& q, std::uint64_t x, std::size_t extra) {
  Eigen::VectorXcd amps =
      Eigen::VectorXcd::Zero(Eigen::Index{1} << (q.total_qubits() + extra));
  for (Eigen::Index a = 0; a < q.aux_init.size(); ++a) {
    amps(static_cast<Eigen::Index>(x | (static_cast<std::uint64_t>(a) << q.n))) = q.aux_init(a);
  }
  return DenseState::from_amplitudes(std::move(amps));
}

// The full GL circuit up to (not including) the x measurement. The kickback
// qubit sits just above the query's registers.
DenseState gl_final_state(const InnerProductQuery& q) {
  const std::size_t kick = q.total_qubits();
  DenseState state = basis_input(q, 0, 1);
  for (std::size_t i = 0; i < q.n; ++i) state.apply(make_gate(GateKind::kH, {i}));
  state.apply(make_gate(GateKind::kX, {kick}));
  state.apply(make_gate(GateKind::kH, {kick}));
  state.apply(q.apply);
  state.apply(make_gate(GateKind::kCX, {q.answer_qubit(), kick}));
  state.apply(inverse(q.apply));
  for (std::size_t i = 0; i < q.n; ++i) state.apply(make_gate(GateKind::kH, {i}));
  return state;
}

bool is_preimage(const tcf::TcfKey& key, const BitString& x, const BitString& y) {
  return tcf::in_domain(key, x) && tcf::eval(key, x) == y;
}

BitString parity_target(const Adversary& adv, const tcf::Claw& claw) {
  if (claw.x0.size() != adv.n() || claw.x1.size() != adv.n()) {
    throw ValidationError("claw width does not match the adversary key");
  }
  if (adv.protocol == protocol::ProtocolId::kSimplified) return claw.x0.concat(claw.x1);
  return claw.x0 ^ claw.x1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gates

Gate make_gate(GateKind kind, std::vector<std::size_t> qubits) {
  if (kind == GateKind::kU) throw ValidationError("use make_unitary for U gates");
  Gate g;
  g.kind = kind;
  g.qubits = std::move(qubits);
  if (g.qubits.size() != arity(kind)) {
    throw ValidationError(std::string("gate ") + kind_name(kind) + " takes " +
                          std::to_string(arity(kind)) + " qubit(s)");
  }
  return g;
}

Gate make_unitary(std::size_t qubit, const Eigen::Matrix2cd& u) {
  if (!is_unitary(u)) throw ValidationError("U matrix is not unitary");
  Gate g;
  g.kind = GateKind::kU;
  g.qubits = {qubit};
  g.u = u;
  return g;
}

Circuit inverse(const Circuit& circuit) {
  Circuit out(circuit.rbegin(), circuit.rend());
  for (Gate& g : out) {
    if (g.kind == GateKind::kU) g.u = g.u.adjoint().eval();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layout

void Layout::add(const std::string& name, std::size_t width) {
  if (name.empty() || name.find(':') != std::string::npos) {
    throw ValidationError("bad register name '" + name + "'");
  }
  if (has(name)) throw ValidationError("duplicate register '" + name + "'");
  entries_.push_back({name, total_, width});
  total_ += width;
}

bool Layout::has(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

const Layout::Entry& Layout::find(const std::string& name) const {
  for (const Entry& e : entries_) {
    if (e.name == name) return e;
  }
  throw ValidationError("unknown register '" + name + "'");
}

std::size_t Layout::offset(const std::string& name) const { return find(name).offset; }
std::size_t Layout::width(const std::string& name) const { return find(name).width; }

std::size_t Layout::qubit(const std::string& name, std::size_t index) const {
  const Entry& e = find(name);
  if (index >= e.width) {
    throw ValidationError("qubit " + name + ":" + std::to_string(index) + " out of range");
  }
  return e.offset + index;
}

std::size_t Layout::parse_ref(const std::string& ref) const {
  const auto colon = ref.find(':');
  if (colon == std::string::npos || colon + 1 == ref.size()) {
    throw ValidationError("qubit reference '" + ref + "' is not name:index");
  }
  const std::string idx = ref.substr(colon + 1);
  if (!std::all_of(idx.begin(), idx.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      idx.size() > 6) {
    throw ValidationError("qubit reference '" + ref + "' has a bad index");
  }
  return qubit(ref.substr(0, colon), std::stoul(idx));
}

std::string Layout::ref(std::size_t q) const {
  for (const Entry& e : entries_) {
    if (q >= e.offset && q < e.offset + e.width) {
      return e.name + ":" + std::to_string(q - e.offset);
    }
  }
  throw ValidationError("qubit " + std::to_string(q) + " is outside the layout");
}

// ---------------------------------------------------------------------------
// JSON

Gate gate_from_json(const Json& j, const Layout& layout) {
  if (!j.is_object()) throw ValidationError("gate must be an object");
  const GateKind kind = kind_from_name(require_string(j, "gate"));
  const Json& refs = require(j, "qubits");
  if (!refs.is_array()) throw ValidationError("gate qubits must be an array");
  std::vector<std::size_t> qubits;
  for (const Json& r : refs) {
    if (!r.is_string()) throw ValidationError("qubit references must be strings");
    qubits.push_back(layout.parse_ref(r.get<std::string>()));
  }
  Gate g;
  if (kind == GateKind::kU) {
    const Json& m = require(j, "matrix");
    if (!m.is_array() || m.size() != 2 || !m[0].is_array() || !m[1].is_array() ||
        m[0].size() != 2 || m[1].size() != 2) {
      throw ValidationError("U matrix must be 2x2");
    }
    Eigen::Matrix2cd u;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) u(r, c) = complex_from_json(m[r][c]);
    }
    if (qubits.size() != 1) throw ValidationError("gate U takes 1 qubit(s)");
    g = make_unitary(qubits[0], u);
  } else {
    g = make_gate(kind, qubits);
  }
  check_qubits(g, layout.total(), "gate");
  return g;
}

Json gate_to_json(const Gate& gate, const Layout& layout) {
  Json j;
  j["gate"] = kind_name(gate.kind);
  Json refs = Json::array();
  for (std::size_t q : gate.qubits) refs.push_back(layout.ref(q));
  j["qubits"] = refs;
  if (gate.kind == GateKind::kU) {
    Json m = Json::array();
    for (int r = 0; r < 2; ++r) {
      m.push_back(Json::array({complex_to_json(gate.u(r, 0)), complex_to_json(gate.u(r, 1))}));
    }
    j["matrix"] = m;
  }
  return j;
}

Circuit circuit_from_json(const Json& j, const Layout& layout) {
  if (!j.is_array()) throw ValidationError("circuit must be an array of gates");
  Circuit c;
  for (const Json& g : j) c.push_back(gate_from_json(g, layout));
  return c;
}

Json circuit_to_json(const Circuit& circuit, const Layout& layout) {
  Json j = Json::array();
  for (const Gate& g : circuit) j.push_back(gate_to_json(g, layout));
  return j;
}

// ---------------------------------------------------------------------------
// DenseState

DenseState::DenseState(std::size_t n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits > kMaxQubits) {
    throw CapacityError("dense state of " + std::to_string(n_qubits) + " qubits exceeds " +
                        std::to_string(kMaxQubits));
  }
  amps_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  amps_(0) = 1.0;
}

DenseState DenseState::from_amplitudes(Eigen::VectorXcd amplitudes) {
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < amplitudes.size()) ++n;
  if ((Eigen::Index{1} << n) != amplitudes.size()) {
    throw ValidationError("amplitude count must be a power of two");
  }
  DenseState s(n);
  if (!amplitudes.allFinite() || std::abs(amplitudes.norm() - 1.0) > kNormTolerance) {
    throw ValidationError("dense state is not normalized");
  }
  s.amps_ = std::move(amplitudes);
  return s;
}

void DenseState::apply(const Gate& gate) {
  check_qubits(gate, n_qubits_, "apply");
  std::uint64_t cmask = 0;
  for (std::size_t i = 0; i + 1 < gate.qubits.size(); ++i) cmask |= 1ULL << gate.qubits[i];
  const std::uint64_t tbit = 1ULL << gate.qubits.back();
  const auto dim = static_cast<std::uint64_t>(amps_.size());
  const bool flip = gate.kind == GateKind::kX || gate.kind == GateKind::kCX ||
                    gate.kind == GateKind::kCCX;
  const Eigen::Matrix2cd u = target_matrix(gate);
  for (std::uint64_t i = 0; i < dim; ++i) {
    if ((i & tbit) || (i & cmask) != cmask) continue;
    const auto i0 = static_cast<Eigen::Index>(i);
    const auto i1 = static_cast<Eigen::Index>(i | tbit);
    if (flip) {
      std::swap(amps_(i0), amps_(i1));
      continue;
    }
    const Complex a0 = amps_(i0);
    const Complex a1 = amps_(i1);
    amps_(i0) = u(0, 0) * a0 + u(0, 1) * a1;
    amps_(i1) = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

void DenseState::apply(const Circuit& circuit) {
  for (const Gate& g : circuit) apply(g);
}

std::vector<double> DenseState::distribution(const std::vector<std::size_t>& qubits) const {
  if (qubits.size() > n_qubits_) throw ValidationError("too many qubits to measure");
  for (std::size_t q : qubits) {
    if (q >= n_qubits_) throw ValidationError("measured qubit out of range");
  }
  std::vector<double> dist(std::size_t{1} << qubits.size(), 0.0);
  for (Eigen::Index i = 0; i < amps_.size(); ++i) {
    const double p = std::norm(amps_(i));
    if (p == 0.0) continue;
    std::size_t v = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
      v |= ((static_cast<std::uint64_t>(i) >> qubits[k]) & 1ULL) << k;
    }
    dist[v] += p;
  }
  return dist;
}

double DenseState::collapse(const std::vector<std::size_t>& qubits, std::uint64_t value) {
  double kept = 0.0;
  for (Eigen::Index i = 0; i < amps_.size(); ++i) {
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
      v |= ((static_cast<std::uint64_t>(i) >> qubits[k]) & 1ULL) << k;
    }
    if (v == value) {
      kept += std::norm(amps_(i));
    } else {
      amps_(i) = 0.0;
    }
  }
  if (kept <= 0.0) throw ValidationError("collapse onto an outcome of probability zero");
  amps_ /= std::sqrt(kept);
  return kept;
}

std::uint64_t DenseState::measure(const std::vector<std::size_t>& qubits, Rng& rng) {
  const std::uint64_t v = sample_index(distribution(qubits), rng);
  collapse(qubits, v);
  return v;
}

// ---------------------------------------------------------------------------
// Inner-product queries

std::vector<std::size_t> InnerProductQuery::x_qubits() const { return range_qubits(0, n); }

void InnerProductQuery::validate() const {
  if (n == 0) throw ValidationError("query needs n >= 1");
  if (out_qubits == 0) throw ValidationError("query needs at least one output qubit");
  if (answer >= out_qubits) throw ValidationError("answer qubit outside the output register");
  if (total_qubits() + 1 > kMaxQubits) {
    throw CapacityError("query uses " + std::to_string(total_qubits()) +
                        " qubits plus one kickback qubit; limit is " +
                        std::to_string(kMaxQubits));
  }
  check_unit(aux_init, aux_qubits, "aux_init");
  check_circuit(apply, total_qubits(), "query");
}

bool check_restitution(const InnerProductQuery& q) {
  q.validate();
  const std::vector<std::size_t> xq = q.x_qubits();
  const bool touches_x = std::any_of(q.apply.begin(), q.apply.end(), [&](const Gate& g) {
    return g.qubits.back() < q.n;
  });
  if (!touches_x) return true;
  for (std::uint64_t x = 0; x < (1ULL << q.n); ++x) {
    DenseState s = basis_input(q, x, 0);
    s.apply(q.apply);
    if (std::abs(s.distribution(xq)[x] - 1.0) > 1e-12) return false;
  }
  return true;
}

double predictor_bias(const InnerProductQuery& q, const BitString& a) {
  q.validate();
  if (a.size() != q.n) throw ValidationError("secret width does not match the query");
  double correct = 0.0;
  for (std::uint64_t x = 0; x < (1ULL << q.n); ++x) {
    DenseState s = basis_input(q, x, 0);
    s.apply(q.apply);
    const int want = a.dot(BitString::from_uint(x, q.n));
    correct += s.distribution({q.answer_qubit()})[static_cast<std::size_t>(want)];
  }
  return correct / static_cast<double>(1ULL << q.n) - 0.5;
}

GlExtractor::GlExtractor(InnerProductQuery q) : query_(std::move(q)) {
  query_.validate();
  dist_ = gl_final_state(query_).distribution(query_.x_qubits());
}

double GlExtractor::success_probability(const BitString& a) const {
  if (a.size() != query_.n) throw ValidationError("secret width does not match the query");
  return dist_[a.to_uint()];
}

BitString GlExtractor::sample(Rng& rng) const {
  return BitString::from_uint(sample_index(dist_, rng), query_.n);
}

std::size_t GlExtractor::gate_count() const {
  // H^n, X and H on the kickback qubit, U, CX, U^dagger, H^n.
  return 2 * query_.n + 2 + 2 * query_.apply.size() + 1;
}

BitString gl_extract(const InnerProductQuery& q, Rng& rng) { return GlExtractor(q).sample(rng); }

InnerProductQuery perfect_predictor(const BitString& a) {
  InnerProductQuery q;
  q.n = a.size();
  const std::size_t out = q.n;
  for (std::size_t i = 0; i < q.n; ++i) {
    if (a.get(i)) q.apply.push_back(make_gate(GateKind::kCX, {i, out}));
  }
  return q;
}

InnerProductQuery and_predictor(const BitString& a) {
  if (a.size() < 2) throw ValidationError("and_predictor needs n >= 2");
  InnerProductQuery q = perfect_predictor(a);
  q.apply.push_back(make_gate(GateKind::kCCX, {0, 1, q.n}));
  return q;
}

InnerProductQuery mixed_predictor(const BitString& a, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw ValidationError("weight must lie in [0, 1]");
  InnerProductQuery q;
  q.n = a.size();
  q.aux_qubits = 1;
  q.aux_init = Eigen::VectorXcd(2);
  q.aux_init << std::sqrt(1.0 - weight), std::sqrt(weight);
  const std::size_t aux = q.n;
  const std::size_t out = q.n + 1;
  for (std::size_t i = 0; i < q.n; ++i) {
    if (a.get(i)) q.apply.push_back(make_gate(GateKind::kCX, {i, out}));
  }
  q.apply.push_back(make_gate(GateKind::kX, {aux}));
  q.apply.push_back(make_gate(GateKind::kCCX, {aux, 0, out}));
  q.apply.push_back(make_gate(GateKind::kX, {aux}));
  return q;
}

// ---------------------------------------------------------------------------
// Adversaries

std::size_t Adversary::r_bits() const {
  return protocol == protocol::ProtocolId::kSimplified ? 2 * n() : n();
}

Layout Adversary::layout() const {
  Layout l;
  l.add("r", r_bits());
  if (work_qubits > 0) l.add("work", work_qubits);
  l.add("d", n());
  l.add("b", 1);
  return l;
}

void Adversary::validate() const {
  if (protocol == protocol::ProtocolId::kKlvyChsh) {
    throw ValidationError("claw extraction applies to the simplified and kcvy protocols only");
  }
  if (n() == 0) throw ValidationError("adversary key has an empty domain");
  if (y.size() != key.range_bits) throw ValidationError("y width does not match the key");
  const std::size_t total = r_bits() + work_qubits + n() + 1;
  if (total + 1 > kMaxQubits) {
    throw CapacityError("adversary needs " + std::to_string(total) +
                        " qubits plus one kickback qubit; limit is " +
                        std::to_string(kMaxQubits));
  }
  check_unit(work_init, work_qubits, "work_init");
  check_circuit(round2, total, "round2");
  check_circuit(guess, total, "guess");
  check_circuit(preimage, total, "preimage");
  if (protocol == protocol::ProtocolId::kKcvy) {
    if (preimage_output.size() != n()) {
      throw ValidationError("preimage_output must list " + std::to_string(n()) + " qubits");
    }
    std::set<std::size_t> seen;
    for (std::size_t q : preimage_output) {
      if (q >= total || !seen.insert(q).second) {
        throw ValidationError("preimage_output has a bad or repeated qubit");
      }
    }
  }
}

Adversary adversary_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("adversary must be a JSON object");
  for (const char* piece : {"round2", "guess"}) {
    if (!j.contains(piece)) {
      throw ValidationError(std::string("adversary piece '") + piece +
                            "' missing; pieces must be explicit gate lists, sampled-only "
                            "adversaries cannot be run coherently");
    }
  }
  Adversary adv;
  adv.protocol = protocol::protocol_from_string(require_string(j, "protocol"));
  adv.key = tcf::key_from_json(require(j, "key"));
  adv.y = bits_from_json(require(j, "y"));
  const Json& wq = require(j, "work_qubits");
  if (!wq.is_number_unsigned()) throw ValidationError("work_qubits must be a non-negative integer");
  adv.work_qubits = wq.get<std::size_t>();
  if (adv.work_qubits > kMaxQubits) throw CapacityError("work register too large");
  if (j.contains("work_init")) {
    const Json& wi = j["work_init"];
    if (!wi.is_array()) throw ValidationError("work_init must be an array");
    adv.work_init = Eigen::VectorXcd(static_cast<Eigen::Index>(wi.size()));
    for (std::size_t i = 0; i < wi.size(); ++i) {
      adv.work_init(static_cast<Eigen::Index>(i)) = complex_from_json(wi[i]);
    }
  } else {
    adv.work_init = Eigen::VectorXcd::Zero(Eigen::Index{1} << adv.work_qubits);
    adv.work_init(0) = 1.0;
  }
  if (adv.protocol == protocol::ProtocolId::kKlvyChsh) adv.validate();
  const Layout layout = adv.layout();
  adv.round2 = circuit_from_json(j["round2"], layout);
  adv.guess = circuit_from_json(j["guess"], layout);
  if (j.contains("preimage")) adv.preimage = circuit_from_json(j["preimage"], layout);
  if (j.contains("preimage_output")) {
    const Json& po = j["preimage_output"];
    if (!po.is_array()) throw ValidationError("preimage_output must be an array");
    for (const Json& r : po) {
      if (!r.is_string()) throw ValidationError("qubit references must be strings");
      adv.preimage_output.push_back(layout.parse_ref(r.get<std::string>()));
    }
  }
  adv.validate();
  return adv;
}

Json adversary_to_json(const Adversary& adv) {
  const Layout layout = adv.layout();
  Json j;
  j["protocol"] = protocol::to_string(adv.protocol);
  j["key"] = tcf::key_to_json(adv.key);
  j["y"] = bits_to_json(adv.y);
  j["work_qubits"] = adv.work_qubits;
  Json wi = Json::array();
  for (Eigen::Index i = 0; i < adv.work_init.size(); ++i) wi.push_back(complex_to_json(adv.work_init(i)));
  j["work_init"] = wi;
  j["round2"] = circuit_to_json(adv.round2, layout);
  j["guess"] = circuit_to_json(adv.guess, layout);
  j["preimage"] = circuit_to_json(adv.preimage, layout);
  Json po = Json::array();
  for (std::size_t q : adv.preimage_output) po.push_back(layout.ref(q));
  j["preimage_output"] = po;
  return j;
}

Adversary trapdoor_adversary(protocol::ProtocolId id, const tcf::TcfKey& key,
                             const tcf::Claw& claw, double weight, double kappa) {
  if (!(weight >= 0.0 && weight <= 1.0) || !(kappa >= 0.0 && kappa <= 1.0)) {
    throw ValidationError("weight and kappa must lie in [0, 1]");
  }
  if (!tcf::is_valid_claw(key, claw.x0, claw.x1)) {
    throw ValidationError("trapdoor_adversary needs a valid claw");
  }
  Adversary adv;
  adv.protocol = id;
  adv.key = key;
  adv.y = tcf::eval(key, claw.x0);
  const std::size_t n = key.domain_bits;
  const bool kcvy = id == protocol::ProtocolId::kKcvy;
  if (!kcvy && id != protocol::ProtocolId::kSimplified) {
    throw ValidationError("claw extraction applies to the simplified and kcvy protocols only");
  }

  // work = [x register (kcvy only) | noise qubit]
  const std::size_t xw = kcvy ? n : 0;
  adv.work_qubits = xw + 1;
  adv.work_init = Eigen::VectorXcd::Zero(Eigen::Index{1} << adv.work_qubits);
  const double on = std::sqrt(weight);
  const double off = std::sqrt(1.0 - weight);
  const std::uint64_t noise = 1ULL << xw;
  if (kcvy) {
    std::optional<std::uint64_t> bad;
    for (std::uint64_t v = 0; v < (1ULL << n) && kappa > 0.0; ++v) {
      if (!is_preimage(key, BitString::from_uint(v, n), adv.y)) {
        bad = v;
        break;
      }
    }
    if (kappa > 0.0 && !bad) throw ValidationError("no non-preimage string to mix in");
    const std::uint64_t good = claw.x0.to_uint();
    const double keep = std::sqrt(1.0 - kappa);
    adv.work_init(static_cast<Eigen::Index>(good)) += keep * off;
    adv.work_init(static_cast<Eigen::Index>(good | noise)) += keep * on;
    if (bad) {
      const double miss = std::sqrt(kappa);
      adv.work_init(static_cast<Eigen::Index>(*bad)) += miss * off;
      adv.work_init(static_cast<Eigen::Index>(*bad | noise)) += miss * on;
    }
  } else {
    adv.work_init(0) = off;
    adv.work_init(static_cast<Eigen::Index>(noise)) = on;
  }

  const Layout layout = adv.layout();
  const BitString target = kcvy ? claw.x0 ^ claw.x1 : claw.x0.concat(claw.x1);
  const std::size_t b = layout.qubit("b", 0);
  const std::size_t nq = layout.qubit("work", xw);
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target.get(i)) adv.guess.push_back(make_gate(GateKind::kCX, {layout.qubit("r", i), b}));
  }
  // With the noise qubit at |0> the guess is r.(target ^ e_0): right half the time.
  adv.guess.push_back(make_gate(GateKind::kX, {nq}));
  adv.guess.push_back(make_gate(GateKind::kCCX, {nq, layout.qubit("r", 0), b}));
  adv.guess.push_back(make_gate(GateKind::kX, {nq}));
  if (kcvy) {
    for (std::size_t i = 0; i < n; ++i) adv.preimage_output.push_back(layout.qubit("work", i));
  }
  adv.validate();
  return adv;
}

InnerProductQuery parity_query(const Adversary& adv) {
  adv.validate();
  InnerProductQuery q;
  q.n = adv.r_bits();
  q.aux_qubits = adv.work_qubits;
  q.aux_init = adv.work_init;
  q.out_qubits = adv.n() + 1;
  q.answer = adv.n();
  q.apply = adv.round2;
  q.apply.insert(q.apply.end(), adv.guess.begin(), adv.guess.end());
  return q;
}

// ---------------------------------------------------------------------------
// Reductions

namespace {

InnerProductQuery checked_query(const Adversary& adv,
                                std::optional<protocol::ProtocolId> expect = std::nullopt) {
  if (expect && adv.protocol != *expect) {
    throw ValidationError("extractor expects a " + protocol::to_string(*expect) + " adversary");
  }
  InnerProductQuery q = parity_query(adv);
  if (!check_restitution(q)) {
    throw ValidationError("adversary modifies the r register; the query is not restitutive");
  }
  return q;
}

}  // namespace

SimplifiedExtractor::SimplifiedExtractor(const Adversary& adv)
    : adv_(adv), gl_(checked_query(adv, protocol::ProtocolId::kSimplified)) {}

ExtractionOutcome SimplifiedExtractor::run(Rng& rng) const {
  ExtractionOutcome out;
  out.candidate = gl_.sample(rng);
  const std::size_t n = adv_.n();
  const BitString x0 = out.candidate.slice(0, n);
  const BitString x1 = out.candidate.slice(n, n);
  out.verified = tcf::is_valid_claw(adv_.key, x0, x1);
  if (out.verified) out.claw = tcf::Claw{x0, x1, tcf::eval(adv_.key, x0)};
  return out;
}

KcvyExtractor::KcvyExtractor(const Adversary& adv) : adv_(adv) {
  const InnerProductQuery q = checked_query(adv, protocol::ProtocolId::kKcvy);
  const DenseState final_state = gl_final_state(q);
  const std::vector<std::size_t> rq = q.x_qubits();
  s_dist_ = final_state.distribution(rq);
  branches_.resize(s_dist_.size());
  for (std::size_t s = 0; s < s_dist_.size(); ++s) {
    if (s_dist_[s] <= 0.0) continue;
    DenseState post = final_state;
    post.collapse(rq, s);
    post.apply(adv_.preimage);
    branches_[s].preimage_dist = post.distribution(adv_.preimage_output);
  }
}

ExtractionOutcome KcvyExtractor::run(Rng& rng) const {
  const std::size_t n = adv_.n();
  ExtractionOutcome out;
  const std::size_t s = sample_index(s_dist_, rng);
  out.candidate = BitString::from_uint(s, n);
  const BitString x = BitString::from_uint(sample_index(branches_[s].preimage_dist, rng), n);
  const BitString partner = x ^ out.candidate;
  out.verified = tcf::is_valid_claw(adv_.key, x, partner);
  if (out.verified) out.claw = tcf::Claw{x, partner, tcf::eval(adv_.key, x)};
  return out;
}

ExtractionOutcome claw_from_simplified(const Adversary& adv, Rng& rng) {
  return SimplifiedExtractor(adv).run(rng);
}

ExtractionOutcome claw_from_kcvy(const Adversary& adv, Rng& rng) {
  return KcvyExtractor(adv).run(rng);
}

AdvantageEstimate estimate_parity_advantage(const Adversary& adv, const tcf::Claw& claw,
                                            std::uint64_t samples, Rng& rng) {
  if (samples == 0) throw ValidationError("need at least one sample");
  const InnerProductQuery q = checked_query(adv);
  const BitString target = parity_target(adv, claw);
  // Born probability of a correct guess for each r, then sampled.
  std::vector<double> right(std::size_t{1} << q.n);
  for (std::uint64_t r = 0; r < right.size(); ++r) {
    DenseState s = basis_input(q, r, 0);
    s.apply(q.apply);
    const int want = target.dot(BitString::from_uint(r, q.n));
    right[r] = s.distribution({q.answer_qubit()})[static_cast<std::size_t>(want)];
  }
  AdvantageEstimate est;
  est.samples = samples;
  for (std::uint64_t i = 0; i < samples; ++i) {
    if (rng.bernoulli(right[rng.below(right.size())])) ++est.correct;
  }
  est.delta = static_cast<double>(est.correct) / static_cast<double>(samples) - 0.5;
  const Interval w = wilson_interval(est.correct, samples);
  est.delta_interval = {w.lo - 0.5, w.hi - 0.5};
  return est;
}

PreimageEstimate estimate_preimage_failure(const Adversary& adv, std::uint64_t samples,
                                           Rng& rng) {
  adv.validate();
  if (adv.protocol != protocol::ProtocolId::kKcvy) {
    throw ValidationError("the preimage test exists only in kcvy");
  }
  if (samples == 0) throw ValidationError("need at least one sample");
  const Layout layout = adv.layout();
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(Eigen::Index{1} << layout.total());
  const std::size_t shift = layout.offset("work");
  for (Eigen::Index w = 0; w < adv.work_init.size(); ++w) {
    amps(static_cast<Eigen::Index>(static_cast<std::uint64_t>(w) << shift)) = adv.work_init(w);
  }
  DenseState state = DenseState::from_amplitudes(std::move(amps));
  state.apply(adv.preimage);
  const std::vector<double> dist = state.distribution(adv.preimage_output);
  PreimageEstimate est;
  est.samples = samples;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const BitString x = BitString::from_uint(sample_index(dist, rng), adv.n());
    if (!is_preimage(adv.key, x, adv.y)) ++est.failures;
  }
  est.kappa = static_cast<double>(est.failures) / static_cast<double>(samples);
  est.kappa_interval = wilson_interval(est.failures, samples);
  return est;
}

ExtractionReport run_claw_extraction(const Adversary& adv, const tcf::Claw& claw,
                                     std::uint64_t trials, std::uint64_t estimate_samples,
                                     Rng& rng) {
  if (trials == 0) throw ValidationError("need at least one trial");
  ExtractionReport report;
  report.trials = trials;
  report.advantage = estimate_parity_advantage(adv, claw, estimate_samples, rng);
  const double d = std::clamp(report.advantage.delta, 0.0, 0.5);
  if (adv.protocol == protocol::ProtocolId::kSimplified) {
    const SimplifiedExtractor ex(adv);
    for (std::uint64_t t = 0; t < trials; ++t) {
      if (ex.run(rng).verified) ++report.verified;
    }
    report.bound = 4.0 * d * d;
  } else {
    report.preimage = estimate_preimage_failure(adv, estimate_samples, rng);
    const KcvyExtractor ex(adv);
    for (std::uint64_t t = 0; t < trials; ++t) {
      if (ex.run(rng).verified) ++report.verified;
    }
    report.bound = 1.0 - report.preimage->kappa - std::sqrt(1.0 - 4.0 * d * d);
  }
  report.frequency = static_cast<double>(report.verified) / static_cast<double>(trials);
  report.interval = wilson_interval(report.verified, trials);
  return report;
}

Json extraction_report_to_json(const ExtractionReport& report) {
  Json j;
  j["trials"] = report.trials;
  j["verified"] = report.verified;
  j["frequency"] = report.frequency;
  j["interval"] = Json::array({report.interval.lo, report.interval.hi});
  j["delta"] = report.advantage.delta;
  j["delta_interval"] =
      Json::array({report.advantage.delta_interval.lo, report.advantage.delta_interval.hi});
  j["delta_samples"] = report.advantage.samples;
  if (report.preimage) {
    j["kappa"] = report.preimage->kappa;
    j["kappa_interval"] =
        Json::array({report.preimage->kappa_interval.lo, report.preimage->kappa_interval.hi});
  }
  j["bound"] = report.bound;
  return j;
}

}  // namespace qkit::extraction
