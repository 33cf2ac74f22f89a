#include "sbt/filter.hpp"

#include "sbt/constants.hpp"
#include "sbt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace sbt {

void FabryPerotStage::validate() const
{
    if (!(fwhm_hz > 0.0))
        throw ValidationError("filter stage: FWHM must be > 0");
    if (!(fsr_hz > fwhm_hz))
        throw ValidationError("filter stage: FSR must exceed FWHM");
    if (!(peak_transmission > 0.0) || peak_transmission > 1.0)
        throw ValidationError("filter stage: peak transmission must be in (0, 1]");
}

void DriftLaw::validate() const
{
    if (!(stable_window_s > 0.0))
        throw ValidationError("drift law: stable window must be > 0");
    if (!(post_window_factor > 0.0) || post_window_factor > 1.0)
        throw ValidationError("drift law: transmission factor must be in (0, 1]");
}

double FilterChain::peak_transmission() const
{
    double product = 1.0;
    for (const auto& stage : stages)
        product *= stage.peak_transmission;
    return product;
}

void FilterChain::validate() const
{
    if (stages.empty())
        throw ValidationError("filter chain: at least one stage required");
    for (const auto& stage : stages)
        stage.validate();
    drift.validate();
    if (extinction_floor < 0.0 || extinction_floor > 1.0)
        throw ValidationError("filter chain: extinction floor must be in [0, 1]");
}

double stage_transmission(const FabryPerotStage& stage, double offset_hz)
{
    const double finesse = stage.finesse();
    const double coeff = 2.0 * finesse / std::numbers::pi;
    const double s = std::sin(std::numbers::pi * offset_hz / stage.fsr_hz);
    return stage.peak_transmission / (1.0 + coeff * coeff * s * s);
}

double chain_transmission(const FilterChain& chain, double offset_hz,
                          double elapsed_s)
{
    if (elapsed_s < 0.0)
        throw DomainError("chain_transmission: elapsed time must be >= 0");
    double product = 1.0;
    for (const auto& stage : chain.stages)
        product *= stage_transmission(stage, offset_hz);
    product = std::max(product, chain.extinction_floor * chain.peak_transmission());
    if (elapsed_s > chain.drift.stable_window_s)
        product *= chain.drift.post_window_factor;
    return product;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0)
        throw NumericalError("sweep_response: quadrature did not converge");
    if (std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f,
                 const std::vector<double>& knots, double tol)
{
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i];
        const double b = knots[i + 1];
        if (!(b > a))
            continue;
        const double m = 0.5 * (a + b);
        const double fa = f(a);
        const double fm = f(m);
        const double fb = f(b);
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
    }
    return total;
}

// Overlap of the chain transmission (centered at 0) with a unit-peak
// mechanical Lorentzian centered at line_offset.
double overlap(const FilterChain& chain, double mech_fwhm, double line_offset)
{
    const double half = 0.5 * mech_fwhm;
    auto integrand = [&](double f) {
        double t = 1.0;
        for (const auto& stage : chain.stages)
            t *= stage_transmission(stage, f);
        const double d = f - line_offset;
        return t * half * half / (d * d + half * half);
    };

    double width = mech_fwhm;
    for (const auto& stage : chain.stages)
        width = std::max(width, stage.fwhm_hz);
    const double lo = std::min(0.0, line_offset) - 400.0 * width;
    const double hi = std::max(0.0, line_offset) + 400.0 * width;
    std::vector<double> knots{lo, std::min(0.0, line_offset),
                              std::max(0.0, line_offset), hi};
    // Absolute tolerance scaled to the expected integral magnitude.
    const double tol = 1e-7 * width;
    return integrate(integrand, knots, tol);
}

} // namespace

double sweep_response(const FilterChain& chain, const MechanicalMode& mech,
                      double probe_detuning_hz)
{
    chain.validate();
    mech.validate();
    // Scattered photons land one mechanical frequency towards the resonance.
    const double line_offset = probe_detuning_hz >= 0.0
        ? probe_detuning_hz - mech.frequency_hz
        : probe_detuning_hz + mech.frequency_hz;
    const double peak = overlap(chain, mech.damping_hz, 0.0);
    if (!(peak > 0.0))
        throw NumericalError("sweep_response: vanishing normalization");
    return overlap(chain, mech.damping_hz, line_offset) / peak;
}

} // namespace sbt
