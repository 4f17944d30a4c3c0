// A short walk through the library: dilation of the radial stretch, a flow line
// of a constant-dilation map, a trace on the unit sphere and a few flow steps.

#include <iostream>

#include "qcflow/flowlines.hpp"
#include "qcflow/gradientflow.hpp"
#include "qcflow/registry.hpp"
#include "qcflow/traces.hpp"

int main() {
  using namespace qcflow;

  const SmoothMap radial = radial_stretch(2.0, 3);
  const Vector x{0.6, 0.0, 0.8};
  const Jet2Sample s = radial.jet(x);
  const DilationReport r = analyze(s.J);
  std::cout << "radial stretch, alpha = 2, at " << x << "\n"
            << "  K^2 = " << r.K * r.K << " (closed form " << RadialClosedForms{2.0, 3}.K2() << ")\n"
            << "  |L_inf u| = " << linfty_factored(s).norm() << "\n"
            << "  L_2 u = " << lp_nondiv(s, 2.0) << "\n";

  const SmoothMap t = teichmuller_map(3, 3);
  const FlowTrajectory line = trace_flowline(t, Vector{0.1, 0.2, 0.0}, 1e-3, 1.0, Domain::ball(Vector(3), 1.0));
  std::cout << "flow line of a Teichmuller-type map: " << line.samples.size() << " samples, ended at "
            << to_string(line.terminated) << ", K drift " << line.max_K_drift() << "\n";

  const TraceInequality tr =
      trace_inequality_check(radial, Hypersurface::sphere(Vector(3), 1.0), Vector{0.0, 0.6, 0.8});
  std::cout << "trace on the unit sphere: K_t^2 = " << tr.lhs << " <= " << tr.rhs << "\n";

  GridField g = GridField::sample(bump_map(0.05, 2), {17, 17}, 1.0 / 16, Vector(2));
  const FlowRunStats st = run_flow(g, 2.0, 0.002);
  std::cout << "gradient flow, 17x17, p = 2: energy " << st.energy.front() << " -> " << st.energy.back()
            << " in " << st.steps() << " steps\n";
}
