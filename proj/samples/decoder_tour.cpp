// Builds every decoder for one code and noise level and prints their
// entanglement fidelities next to the bounds.
//
//   decoder_tour [bitflip3|lncy4|fivequbit] [p]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "petzlab/petzlab.hpp"

using namespace petzlab;

int main(int argc, char** argv) {
  const std::string code = argc > 1 ? argv[1] : "lncy4";
  const double p = argc > 2 ? std::atof(argv[2]) : 0.2;
  try {
    const Setting setting = make_setting(code);
    const DensityOperator& rho = setting.source;
    const KrausChannel n = setting.channel(p);
    const DensityOperator sigma = sigma_rb_of(rho, n);

    const double f_none = fe_of_decoder(rho, n, identity_decoder(n.d_out()));
    const double f_petz = fe_of_decoder(rho, n, build_petz(rho, n));
    const auto twirled = build_twirled_petz(rho, n);
    const double f_tw = fe_of_decoder(rho, n, twirled.decoder);
    const double f_sw = fe_of_decoder(rho, n, build_sw(rho, n).decoder);
    const auto opt = solve_optimal_decoder(rho, n);
    const double eps = epsilon_sw(sigma);

    std::printf("%s, p = %g\n", code.c_str(), p);
    std::printf("  no decoder        %.10f\n", f_none);
    std::printf("  Petz              %.10f  (closed form %.10f)\n", f_petz, fe_closed_form(sigma, ClosedFormVariant::Petz));
    std::printf("  twirled Petz      %.10f  (closed form %.10f, %zu nodes)\n", f_tw,
                fe_closed_form(sigma, ClosedFormVariant::Twirled), twirled.quadrature.rule.nodes.size());
    std::printf("  SW                %.10f\n", f_sw);
    std::printf("  optimal (SDP)     %.10f  (gap %.1e, %zu x %zu)\n", opt.value, opt.solution.gap, opt.reduced_dim,
                opt.reduced_dim);
    std::printf("  lower bound SW    %.10f\n", std::exp2(min_petz_mi_order2(sigma, inverse_marginal_r(sigma))));
    std::printf("  2^-eps            %.10f  (eps = %.6g)\n", std::exp2(-eps), eps);
    std::printf("  sqrt(F_petz)      %.10f\n", std::sqrt(f_petz));
  } catch (const Error& e) {
    std::fprintf(stderr, "decoder_tour: %s\n", e.what());
    return 1;
  }
  return 0;
}
