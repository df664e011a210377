#pragma once

// The executable catalog.  Each model bundles a Hamiltonian system with every
// structure the verifier certifies about it: declared magnetic field,
// integrals of motion, torsion-free operators with their singular sets and
// closed-form spectra, chains, algebra/involution wiring, canonical chart
// maps with declared diagonal forms, Staeckel attachments, separated
// Hamilton-Jacobi branches, parameter constraints, and the sampling box.
//
// Everything is immutable after make_model(); verification fans out over it.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hamiltonian.hpp"
#include "stackel.hpp"

namespace omh {

struct Box {
  Vec6 lo{}, hi{};
};

// a named phase-space scalar; `avoid` lists fields whose zero set must be
// kept away from when the scalar is sampled (e.g. a denominator)
struct NamedField {
  std::string name;
  std::string label;
  ScalarFieldPtr field;
  std::vector<ScalarFieldPtr> avoid;
};

struct SpectrumPart {
  ScalarFieldPtr value;  // closed-form eigenvalue as a field
  int multiplicity = 0;
};

struct NamedOperator {
  std::string name;
  std::string label;
  OperatorFieldPtr op;
  std::vector<ScalarFieldPtr> avoid;   // singular set: these must stay nonzero
  std::vector<SpectrumPart> spectrum;  // declared closed-form spectrum
  bool spectrum_derived = false;       // true: closed form derived by this tool
};

// K^T dH closes and equals d(target)
struct ChainSpec {
  std::string op;
  std::string target;  // integral name; the generator is always the model H
};

struct PairSpec {
  std::string a, b;
};

// {a, b} = coeff * rhs  (rhs empty: the bracket is the constant `coeff`)
struct BracketRelation {
  std::string a, b;
  double coeff = 0.0;
  std::string rhs;
};

// declared diagonal entry of a conjugated operator in the new chart; the
// entry is checked at slots `slot` and `slot + 3`
struct DiagMatch {
  std::string op;
  int slot = 0;
  ScalarFieldPtr entry;  // function of the new-chart phase point
};

struct ChartMapSpec {
  std::string name;
  VectorFunctionPtr forward;          // old phase point -> new phase point
  std::vector<ScalarFieldPtr> avoid;  // evaluated on the old chart
  // old-model field name -> declared closed form on the new chart
  std::vector<std::pair<std::string, ScalarFieldPtr>> field_match;
  std::vector<DiagMatch> diag_ops;
  std::vector<std::string> offdiag_ops;  // diagonality checked, no declared entry
  std::vector<PairSpec> sepinv;          // pairs of field_match names
  int ignorable_coord = -1;  // if >= 0: d(H_new)/dq^i must vanish (split check)
};

struct StackelAttachment {
  std::string name;
  StackelSpec spec;
  VectorFunctionPtr to_chart;         // model phase point -> (q, p) of the spec
  std::vector<ScalarFieldPtr> avoid;  // evaluated on the attachment chart
  // declared basis solving S * declared = f; declared[0] generates the chains
  std::array<ScalarFieldPtr, 3> declared;
  std::array<std::string, 3> declared_names;
  // additional first integrals on the attachment chart (e.g. a momentum-type
  // integral the declared basis is recombined with)
  std::vector<NamedField> extra_fields;
  // pairs among declared_names and extra_fields names
  std::vector<PairSpec> extra_involution;
};

struct HJSlot {
  bool direct = false;  // p_k = h[h_index] verbatim
  int h_index = 0;
  // squared momentum branch p_k^2 = radicand(q^k, h); negative => forbidden
  std::function<double(double, const std::array<double, 3>&)> radicand;
};

struct HJSpec {
  // which model fields the separation constants pin: h[0] always the model H
  std::array<std::string, 3> h_names;
  std::array<HJSlot, 3> slot;
  // minimum |p_k| for an admissible draw on quadrature slots
  double momentum_floor = 0.05;
};

enum class ConstraintKind { Positive, NonZero, OneSign };

struct ConstraintSpec {
  std::string name;   // check id, e.g. "mu1-nonzero"
  std::string desc;   // the inequality, e.g. "mu1(x) != 0"
  ScalarFieldPtr value;
  ConstraintKind kind = ConstraintKind::Positive;
};

struct PeriodicCheck {
  std::string name;  // function slot name
  FunctionDef fn;
  double period = 0.0;
};

struct ModelSpec {
  std::string id;
  std::string title;
  std::string gauge;  // empty if the model has no gauge menu
  bool degenerate = false;
  std::map<std::string, double> params;
  std::vector<FunctionDef> functions;  // resolved function slots
  HamiltonianSystem sys;
  std::array<ScalarFieldPtr, 3> b_declared;  // unit-basis components, fn of q
  std::vector<NamedField> integrals;         // excludes H itself
  std::vector<NamedOperator> operators;
  std::vector<ChainSpec> chains;
  std::vector<PairSpec> algebra_pairs;
  std::vector<PairSpec> involution;  // names among {"H"} + integrals
  std::vector<BracketRelation> relations;
  std::vector<PairSpec> sepinv;  // per-coordinate involution on the native chart
  std::vector<ChartMapSpec> charts;
  std::vector<StackelAttachment> stackels;
  std::optional<HJSpec> hj;
  std::vector<ConstraintSpec> constraints;
  std::vector<PeriodicCheck> periodic;
  Box box;
  Vec6 sim_x0{};
  double sim_dt = 1e-3;
  double sim_tfinal = 10.0;
};

// catalog listing entry (static description, no fields constructed)
struct SlotInfo {
  std::string name;
  std::string var;       // the single variable the slot may use
  std::string fallback;  // default expression text
};

struct ModelInfo {
  std::string id;
  std::string title;
  std::vector<std::pair<std::string, double>> params;  // name, default
  std::vector<SlotInfo> slots;
  std::vector<std::string> gauges;  // empty if fixed gauge
};

std::vector<ModelInfo> catalog();

// Build a catalog model.  Unknown ids/params/slots/gauges and malformed or
// out-of-scope slot expressions raise ConfigError.
ModelSpec make_model(const std::string& id,
                     const std::map<std::string, double>& params = {},
                     const std::map<std::string, std::string>& fns = {},
                     const std::string& gauge = "");

// name lookup ("H" resolves to the Hamiltonian itself)
ScalarFieldPtr model_field(const ModelSpec& m, const std::string& name);
const NamedOperator& model_operator(const ModelSpec& m, const std::string& name);

// Substitute the separated momentum branches p_k(q^k; h) into the phase
// point (q given, momentum signs taken from `signs`) and return the
// reconstructed point.  ForbiddenRegion if some radicand is negative.
Vec6 hj_point(const ModelSpec& m, const std::array<double, 3>& q,
              const std::array<double, 3>& h, const std::array<int, 3>& signs);

// max over the three pinned fields of |F_i(x) - h_i| at the reconstructed point
double hj_residual(const ModelSpec& m, const std::array<double, 3>& q,
                   const std::array<double, 3>& h, const std::array<int, 3>& signs);

}  // namespace omh
