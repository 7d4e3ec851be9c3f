#pragma once

// Terahertz time-domain spectroscopy: spectra of field traces, transfer
// function, and optical constants of a slab in vacuum.
//
// Units: time in ps, frequency in THz, thickness in mm, absorption in 1/cm.
// Fourier convention E(w) = sum_k E(t_k) exp(+i w t_k) dt, so a delay tau
// multiplies the spectrum by exp(+i w tau).

#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gjsim::thz {

using Complex = std::complex<double>;

enum class TraceLabel { reference, sample };

struct FieldTrace {
    std::vector<double> t;  ///< ps, uniform
    std::vector<double> e;
    TraceLabel label = TraceLabel::reference;

    /// Throws NumericError for fewer than 64 samples or non-uniform spacing.
    void validate() const;
    double dt() const;
};

enum class WindowKind { rectangular, tukey };

struct Window {
    WindowKind kind = WindowKind::rectangular;
    double taper = 0.2;  ///< Tukey taper fraction of the window length
    std::optional<double> t_start;  ///< ps; samples outside [t_start, t_end] are zeroed
    std::optional<double> t_end;
};

struct Spectrum {
    std::vector<double> freq;  ///< THz, bins k / (N dt) for k = 0..N/2
    std::vector<Complex> values;
    std::size_t n_time = 0;
    double dt = 0.0;  ///< ps
};

Spectrum dft_field(const FieldTrace& trace, const Window& window = {});

/// Inverse of dft_field for a full-length spectrum, sampled on `t`.
FieldTrace inverse_dft(const Spectrum& spectrum, const std::vector<double>& t, TraceLabel label);

struct TransferFunction {
    std::vector<double> freq;
    std::vector<Complex> h;
    std::vector<bool> valid;
    std::vector<double> reference_amplitude;
};

/// H = E_s / E_r. Bins where |E_r| or |E_s| falls below snr_floor max|E_r|,
/// or with |H| below `h_floor`, are masked. Throws NumericError when the grids differ.
TransferFunction transfer_function(const Spectrum& sample, const Spectrum& reference, double snr_floor = 1e-3,
                                   double h_floor = 1e-30);

struct OpticalConstants {
    std::vector<double> freq;
    std::vector<double> n;
    std::vector<double> kappa;
    std::vector<double> alpha;  ///< 1/cm
    std::vector<bool> valid;
    double thickness = 0.0;  ///< mm
};

/// Unwrapped phase of H on valid bins (0 elsewhere). Unwrapping starts at the
/// valid bin of largest reference amplitude; the 2 pi branch is fixed so the linear
/// fit over the anchor band (valid bins at or below the anchor frequency with
/// at least `anchor_fraction` of its reference amplitude) extrapolates to
/// |phi(0)| < pi.
std::vector<double> unwrap_phase(const TransferFunction& tf, double anchor_fraction = 0.5);

OpticalConstants extract_constants(const TransferFunction& tf, double thickness_mm, double anchor_fraction = 0.5);

using Dispersion = std::function<double(double nu_thz)>;

/// Single-pass transmission of a slab with complex index n + i kappa.
Complex slab_transmission(double nu_thz, double n, double kappa, double thickness_mm);

/// reference x slab_transmission on every bin.
Spectrum synthesize_sample(const Dispersion& n, const Dispersion& kappa, double thickness_mm,
                           const Spectrum& reference);

/// Time-domain sample trace for a reference trace (circular convolution).
FieldTrace synthesize_sample_trace(const FieldTrace& reference, const Dispersion& n, const Dispersion& kappa,
                                   double thickness_mm);

/// Band-limited single-cycle pulse exp(-((t - t0)/width)^2) (t - t0)/width.
FieldTrace model_pulse(std::size_t samples, double dt_ps, double t0_ps, double width_ps);

struct AnalysisOptions {
    double snr_floor = 1e-3;
    WindowKind window = WindowKind::rectangular;
    double taper = 0.2;
    bool echo_refine = true;
    double echo_margin = 0.9;  ///< window ends at this fraction of the echo delay 2 n d / c
    double anchor_fraction = 0.5;
};

struct Analysis {
    OpticalConstants constants;
    TransferFunction transfer;
    std::optional<double> window_end;  ///< ps, set when echo refinement ran
    double first_pass_index = 0.0;     ///< band-averaged n before refinement
};

/// Full pipeline: spectra, transfer function, extraction, then one refinement
/// with the sample window ending before the first Fabry-Perot echo.
Analysis analyze(const FieldTrace& reference, const FieldTrace& sample, double thickness_mm,
                 const AnalysisOptions& options = {});

/// Two columns (time_ps, field), comma or whitespace separated; lines that do
/// not start with a number are skipped.
FieldTrace read_trace(std::istream& in, TraceLabel label, const std::string& name = "trace");
FieldTrace read_trace_file(const std::string& path, TraceLabel label);
void write_trace(std::ostream& out, const FieldTrace& trace);
void write_constants(std::ostream& out, const OpticalConstants& oc);

}  // namespace gjsim::thz
