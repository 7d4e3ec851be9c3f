#include "gjsim/thz_tds.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>

#include "gjsim/constants.hpp"
#include "gjsim/error.hpp"
#include "gjsim/format.hpp"

namespace gjsim::thz {

namespace {

// FFTW planning is not thread safe; execution is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

struct RealBuffer {
    explicit RealBuffer(std::size_t n) : p(fftw_alloc_real(n)) {}
    ~RealBuffer() { fftw_free(p); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
    double* p;
};

struct ComplexBuffer {
    explicit ComplexBuffer(std::size_t n) : p(fftw_alloc_complex(n)) {}
    ~ComplexBuffer() { fftw_free(p); }
    ComplexBuffer(const ComplexBuffer&) = delete;
    ComplexBuffer& operator=(const ComplexBuffer&) = delete;
    fftw_complex* p;
};

struct Plan {
    fftw_plan p = nullptr;
    ~Plan() {
        if (!p) return;
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(p);
    }
};

double wrap(double a) { return a - 2.0 * kPi * std::round(a / (2.0 * kPi)); }

// omega d / c for nu in THz and d in mm.
double optical_path(double nu_thz, double thickness_mm) {
    return 2.0 * kPi * nu_thz * 1e12 * thickness_mm * 1e-3 / kPhys.c;
}

double window_weight(const Window& w, double t, double t0, double t1) {
    if (t < t0 || t > t1) return 0.0;
    if (w.kind == WindowKind::rectangular || w.taper <= 0.0) return 1.0;
    const double x = (t - t0) / (t1 - t0);
    const double a = std::min(w.taper, 1.0);
    if (x < 0.5 * a) return 0.5 * (1.0 - std::cos(2.0 * kPi * x / a));
    if (x > 1.0 - 0.5 * a) return 0.5 * (1.0 - std::cos(2.0 * kPi * (1.0 - x) / a));
    return 1.0;
}

std::size_t peak_index(const FieldTrace& tr) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < tr.e.size(); ++i)
        if (std::abs(tr.e[i]) > std::abs(tr.e[k])) k = i;
    return k;
}

}  // namespace

void FieldTrace::validate() const {
    if (t.size() != e.size()) throw NumericError("trace time and field columns differ in length");
    if (t.size() < 64) throw NumericError("trace needs at least 64 samples, got " + std::to_string(t.size()));
    const double step = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(step > 0.0)) throw NumericError("trace time axis must be strictly increasing");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - step) > 1e-9 * step)
            throw NumericError("trace sampling is not uniform at sample " + std::to_string(i));
}

double FieldTrace::dt() const { return (t.back() - t.front()) / static_cast<double>(t.size() - 1); }

Spectrum dft_field(const FieldTrace& trace, const Window& window) {
    trace.validate();
    const std::size_t n = trace.t.size();
    const double dt = trace.dt();
    const double t0 = window.t_start.value_or(trace.t.front());
    const double t1 = window.t_end.value_or(trace.t.back());

    RealBuffer in(n);
    ComplexBuffer out(n / 2 + 1);
    Plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan.p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.p, out.p, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i) in.p[i] = trace.e[i] * window_weight(window, trace.t[i], t0, t1);
    fftw_execute(plan.p);

    Spectrum s;
    s.n_time = n;
    s.dt = dt;
    s.freq.resize(n / 2 + 1);
    s.values.resize(n / 2 + 1);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double nu = static_cast<double>(k) / (static_cast<double>(n) * dt);
        const double w = 2.0 * kPi * nu;  // rad/ps
        s.freq[k] = nu;
        s.values[k] = dt * std::polar(1.0, w * trace.t.front()) * Complex(out.p[k][0], -out.p[k][1]);
    }
    return s;
}

FieldTrace inverse_dft(const Spectrum& spectrum, const std::vector<double>& t, TraceLabel label) {
    const std::size_t n = spectrum.n_time;
    if (t.size() != n || spectrum.values.size() != n / 2 + 1)
        throw NumericError("inverse_dft: spectrum and time axis do not match");
    ComplexBuffer in(n / 2 + 1);
    RealBuffer out(n);
    Plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan.p = fftw_plan_dft_c2r_1d(static_cast<int>(n), in.p, out.p, FFTW_ESTIMATE);
    }
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double w = 2.0 * kPi * spectrum.freq[k];
        const Complex f = std::conj(spectrum.values[k] * std::polar(1.0, -w * t.front()) / spectrum.dt);
        in.p[k][0] = f.real();
        in.p[k][1] = f.imag();
    }
    fftw_execute(plan.p);
    FieldTrace tr;
    tr.t = t;
    tr.e.resize(n);
    for (std::size_t i = 0; i < n; ++i) tr.e[i] = out.p[i] / static_cast<double>(n);
    tr.label = label;
    return tr;
}

TransferFunction transfer_function(const Spectrum& sample, const Spectrum& reference, double snr_floor,
                                   double h_floor) {
    if (sample.freq.size() != reference.freq.size()) throw NumericError("sample and reference grids differ in size");
    for (std::size_t k = 0; k < sample.freq.size(); ++k)
        if (std::abs(sample.freq[k] - reference.freq[k]) > 1e-12 * std::max(1.0, std::abs(reference.freq[k])))
            throw NumericError("sample and reference frequency grids differ");
    double peak = 0.0;
    for (const Complex& v : reference.values) peak = std::max(peak, std::abs(v));

    TransferFunction tf;
    tf.freq = reference.freq;
    tf.h.resize(tf.freq.size());
    tf.valid.resize(tf.freq.size());
    tf.reference_amplitude.resize(tf.freq.size());
    for (std::size_t k = 0; k < tf.freq.size(); ++k) {
        const double ar = std::abs(reference.values[k]);
        tf.reference_amplitude[k] = ar;
        const bool strong = ar > 0.0 && ar >= snr_floor * peak && std::abs(sample.values[k]) >= snr_floor * peak;
        // written out so that an identical sample gives exactly 1
        const Complex sv = sample.values[k], rv = reference.values[k];
        const double den = rv.real() * rv.real() + rv.imag() * rv.imag();
        const Complex h = strong ? Complex((sv.real() * rv.real() + sv.imag() * rv.imag()) / den,
                                           (sv.imag() * rv.real() - sv.real() * rv.imag()) / den)
                                 : Complex(0.0, 0.0);
        const bool ok = strong && std::isfinite(h.real()) && std::isfinite(h.imag()) && std::abs(h) >= h_floor;
        tf.h[k] = ok ? h : Complex(0.0, 0.0);
        tf.valid[k] = ok;
    }
    return tf;
}

std::vector<double> unwrap_phase(const TransferFunction& tf, double anchor_fraction) {
    const std::size_t n = tf.freq.size();
    std::size_t anchor = n;
    for (std::size_t k = 0; k < n; ++k)
        if (tf.valid[k] && tf.freq[k] > 0.0 && (anchor == n || tf.reference_amplitude[k] > tf.reference_amplitude[anchor]))
            anchor = k;
    if (anchor == n) throw NumericError("phase unwrapping anchor not found: no valid bin");

    std::vector<double> phi(n, 0.0);
    phi[anchor] = std::arg(tf.h[anchor]);
    std::size_t prev = anchor;
    for (std::size_t k = anchor + 1; k < n; ++k) {
        if (!tf.valid[k]) continue;
        phi[k] = phi[prev] + wrap(std::arg(tf.h[k]) - std::arg(tf.h[prev]));
        prev = k;
    }
    prev = anchor;
    for (std::size_t k = anchor; k-- > 0;) {
        if (!tf.valid[k]) continue;
        phi[k] = phi[prev] + wrap(std::arg(tf.h[k]) - std::arg(tf.h[prev]));
        prev = k;
    }

    const double peak = tf.reference_amplitude[anchor];
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    // low-frequency half of the band: curvature from dispersion shifts the
    // extrapolated intercept less there
    for (std::size_t k = 0; k <= anchor; ++k) {
        if (!tf.valid[k] || tf.reference_amplitude[k] < anchor_fraction * peak) continue;
        const double x = tf.freq[k];
        sx += x;
        sy += phi[k];
        sxx += x * x;
        sxy += x * phi[k];
        ++m;
    }
    if (m < 2) throw NumericError("phase unwrapping anchor band holds fewer than two valid bins");
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    const double shift = -2.0 * kPi * std::round(intercept / (2.0 * kPi));
    for (std::size_t k = 0; k < n; ++k)
        if (tf.valid[k]) phi[k] += shift;
    return phi;
}

OpticalConstants extract_constants(const TransferFunction& tf, double thickness_mm, double anchor_fraction) {
    if (!(thickness_mm > 0.0)) throw ConfigError("thickness_mm", "thickness must be positive");
    const std::vector<double> phi = unwrap_phase(tf, anchor_fraction);
    const double d_m = thickness_mm * 1e-3;
    OpticalConstants oc;
    oc.thickness = thickness_mm;
    oc.freq = tf.freq;
    const std::size_t n = tf.freq.size();
    oc.n.assign(n, 0.0);
    oc.kappa.assign(n, 0.0);
    oc.alpha.assign(n, 0.0);
    oc.valid.assign(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        if (!tf.valid[k] || tf.freq[k] <= 0.0) continue;
        const double w = 2.0 * kPi * tf.freq[k] * 1e12;
        const double idx = 1.0 + phi[k] / optical_path(tf.freq[k], thickness_mm);
        if (!(idx > 0.0)) continue;
        const double alpha_m = -(2.0 / d_m) * std::log((idx + 1.0) * (idx + 1.0) / (4.0 * idx) * std::abs(tf.h[k]));
        oc.n[k] = idx;
        oc.alpha[k] = alpha_m / 100.0;
        oc.kappa[k] = alpha_m * kPhys.c / (2.0 * w);
        oc.valid[k] = true;
    }
    return oc;
}

Complex slab_transmission(double nu_thz, double n, double kappa, double thickness_mm) {
    const double q = optical_path(nu_thz, thickness_mm);
    return 4.0 * n / ((n + 1.0) * (n + 1.0)) * std::polar(std::exp(-q * kappa), q * (n - 1.0));
}

Spectrum synthesize_sample(const Dispersion& n, const Dispersion& kappa, double thickness_mm,
                           const Spectrum& reference) {
    Spectrum s = reference;
    for (std::size_t k = 0; k < s.freq.size(); ++k) {
        const double nu = s.freq[k];
        s.values[k] *= slab_transmission(nu, n(nu), kappa(nu), thickness_mm);
    }
    return s;
}

FieldTrace synthesize_sample_trace(const FieldTrace& reference, const Dispersion& n, const Dispersion& kappa,
                                   double thickness_mm) {
    const Spectrum ref = dft_field(reference);
    return inverse_dft(synthesize_sample(n, kappa, thickness_mm, ref), reference.t, TraceLabel::sample);
}

FieldTrace model_pulse(std::size_t samples, double dt_ps, double t0_ps, double width_ps) {
    FieldTrace tr;
    tr.t.resize(samples);
    tr.e.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = dt_ps * static_cast<double>(i);
        const double x = (t - t0_ps) / width_ps;
        tr.t[i] = t;
        tr.e[i] = x * std::exp(-x * x);
    }
    return tr;
}

Analysis analyze(const FieldTrace& reference, const FieldTrace& sample, double thickness_mm,
                 const AnalysisOptions& options) {
    Window w;
    w.kind = options.window;
    w.taper = options.taper;
    const Spectrum ref = dft_field(reference, w);
    Analysis out;
    out.transfer = transfer_function(dft_field(sample, w), ref, options.snr_floor);
    out.constants = extract_constants(out.transfer, thickness_mm, options.anchor_fraction);

    double peak = 0.0, sum = 0.0;
    int m = 0;
    for (double a : out.transfer.reference_amplitude) peak = std::max(peak, a);
    for (std::size_t k = 0; k < out.constants.n.size(); ++k)
        if (out.constants.valid[k] && out.transfer.reference_amplitude[k] >= options.anchor_fraction * peak) {
            sum += out.constants.n[k];
            ++m;
        }
    out.first_pass_index = m > 0 ? sum / m : 1.0;
    if (!options.echo_refine) return out;

    const double echo_delay = 2.0 * out.first_pass_index * thickness_mm * 1e-3 / kPhys.c * 1e12;  // ps
    const double span = options.echo_margin * echo_delay;
    Window ws = w, wr = w;
    ws.t_end = sample.t[peak_index(sample)] + span;
    wr.t_end = reference.t[peak_index(reference)] + span;
    out.window_end = ws.t_end;
    out.transfer = transfer_function(dft_field(sample, ws), dft_field(reference, wr), options.snr_floor);
    out.constants = extract_constants(out.transfer, thickness_mm, options.anchor_fraction);
    return out;
}

FieldTrace read_trace(std::istream& in, TraceLabel label, const std::string& name) {
    FieldTrace tr;
    tr.label = label;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        for (char& c : line)
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        const auto first = line.find_first_not_of(' ');
        if (first == std::string::npos) continue;
        const char c0 = line[first];
        if (!(std::isdigit(static_cast<unsigned char>(c0)) || c0 == '-' || c0 == '+' || c0 == '.')) continue;
        const char* p = line.data() + first;
        const char* end = line.data() + line.size();
        double v[2];
        for (double& x : v) {
            while (p < end && *p == ' ') ++p;
            if (*p == '+') ++p;
            const auto res = std::from_chars(p, end, x);
            if (res.ec != std::errc()) throw NumericError(name + ":" + std::to_string(lineno) + ": expected two numbers");
            p = res.ptr;
        }
        tr.t.push_back(v[0]);
        tr.e.push_back(v[1]);
    }
    try {
        tr.validate();
    } catch (const NumericError& e) {
        throw NumericError(name + ": " + e.what());
    }
    return tr;
}

FieldTrace read_trace_file(const std::string& path, TraceLabel label) {
    std::ifstream in(path);
    if (!in) throw NumericError(path + ": cannot open trace file");
    return read_trace(in, label, path);
}

void write_trace(std::ostream& out, const FieldTrace& trace) {
    out << "time_ps,field\n";
    for (std::size_t i = 0; i < trace.t.size(); ++i) out << fmt17(trace.t[i]) << ',' << fmt17(trace.e[i]) << '\n';
}

void write_constants(std::ostream& out, const OpticalConstants& oc) {
    out << "freq_THz,n,kappa,alpha_per_cm,valid\n";
    for (std::size_t k = 0; k < oc.freq.size(); ++k)
        out << fmt17(oc.freq[k]) << ',' << fmt17(oc.n[k]) << ',' << fmt17(oc.kappa[k]) << ',' << fmt17(oc.alpha[k])
            << ',' << (oc.valid[k] ? 1 : 0) << '\n';
}

}  // namespace gjsim::thz
