#include "hmpc/frontend.hpp"

#include <stdexcept>

namespace hmpc {

CompiledPlain compile_plain(const PlainCircuit& pc) {
  validate(pc);
  CompiledPlain cp;
  Circuit& c = cp.circuit;
  cp.wire_of.assign(pc.n_wires, -1);
  for (const auto& in : pc.inputs) cp.wire_of[in.wire] = c.input(in.owner, 1);
  auto w = [&](int plain) {
    int x = cp.wire_of.at(plain);
    if (x < 0) throw std::invalid_argument("plain wire used before it is produced");
    return x;
  };
  for (const auto& g : pc.gates) {
    int o = -1;
    switch (g.kind) {
      case PlainKind::add: o = c.add(w(g.in[0]), w(g.in[1])); break;
      case PlainKind::sub: o = c.sub(w(g.in[0]), w(g.in[1])); break;
      case PlainKind::cmul: o = c.cmul(w(g.in[0]), g.c); break;
      case PlainKind::mul: o = c.mul(w(g.in[0]), w(g.in[1])); break;
      case PlainKind::trunc_mul: o = c.mul(w(g.in[0]), w(g.in[1]), pc.frac_bits); break;
      case PlainKind::mul3: o = c.mul3(w(g.in[0]), w(g.in[1]), w(g.in[2])); break;
      case PlainKind::mul4: o = c.mul4(w(g.in[0]), w(g.in[1]), w(g.in[2]), w(g.in[3])); break;
      case PlainKind::dotp: {
        const std::size_t nf = g.in.size() / 2;
        std::vector<int> xs, ys;
        for (std::size_t k = 0; k < nf; ++k) xs.push_back(w(g.in[k])), ys.push_back(w(g.in[nf + k]));
        int x = nf == 1 ? xs[0] : c.concat(xs);
        int y = nf == 1 ? ys[0] : c.concat(ys);
        o = c.dotp(x, y, static_cast<std::uint32_t>(nf));
        break;
      }
    }
    cp.wire_of[g.out] = o;
  }
  for (int o : pc.outputs) c.output(w(o));
  return cp;
}

PartyInputs plain_inputs(const CompiledPlain& cp, const PlainCircuit& pc, int n, const std::vector<u64>& values) {
  if (values.size() != pc.inputs.size()) throw std::invalid_argument("one value per plain input is required");
  PartyInputs in(n);
  for (std::size_t i = 0; i < pc.inputs.size(); ++i)
    in.at(pc.inputs[i].owner)[cp.wire_of[pc.inputs[i].wire]] = {values[i]};
  return in;
}

}  // namespace hmpc
