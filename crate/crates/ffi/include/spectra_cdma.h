#ifndef SPECTRA_CDMA_H
#define SPECTRA_CDMA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SpectraStatus {
  SPECTRA_STATUS_OK = 0,
  // Bad argument value (load, order, unknown waveform, ...).
  SPECTRA_STATUS_INVALID_ARGUMENT = 1,
  // Numerical breakdown (Hankel loss of positivity, non-finite values).
  SPECTRA_STATUS_NUMERICAL = 2,
  SPECTRA_STATUS_NULL_POINTER = 3,
  // Result does not fit the output type.
  SPECTRA_STATUS_OUT_OF_RANGE = 4,
  SPECTRA_STATUS_PANIC = 5,
} SpectraStatus;

// Limiting eigenvalue law of a crosscorrelation matrix.
typedef struct SpectraLaw SpectraLaw;

// Gauss quadrature rule.
typedef struct SpectraRule SpectraRule;

// Moment or free-cumulant sequence, indexed from order 1.
typedef struct SpectraSequence SpectraSequence;

// Chip waveform.
typedef struct SpectraWaveform SpectraWaveform;

// Library version, a static NUL-terminated string.
const char *spectra_version(void);

// Message of the last failing call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *spectra_last_error(void);

// Catalan number C_n.
enum SpectraStatus spectra_catalan(size_t n, uint64_t *out);

// Parses `sinc`, `srrc:<alpha>` or `custom:<csv path>`.
enum SpectraStatus spectra_waveform_parse(const char *spec, struct SpectraWaveform **out);

// Spectral moment W^(m), m >= 1.
enum SpectraStatus spectra_waveform_w_moment(const struct SpectraWaveform *w,
                                             size_t m,
                                             double *out);

void spectra_waveform_free(struct SpectraWaveform *w);

// Limiting law at load `beta`. A null `waveform` selects the
// chip-synchronous law; otherwise the chip-asynchronous law of that pulse.
// `fading` is `"unfaded"`, `"rayleigh"` or null (unfaded).
enum SpectraStatus spectra_law_new(double beta,
                                   const struct SpectraWaveform *waveform,
                                   const char *fading,
                                   struct SpectraLaw **out);

// Moments m_1..m_{n_max} of the law.
enum SpectraStatus spectra_law_moments(const struct SpectraLaw *law,
                                       size_t n_max,
                                       struct SpectraSequence **out);

// Gauss rule with `points` nodes (0 picks 10 unfaded, 15 faded).
enum SpectraStatus spectra_law_rule(const struct SpectraLaw *law,
                                    size_t points,
                                    struct SpectraRule **out);

void spectra_law_free(struct SpectraLaw *law);

// Wraps `len` caller values as a sequence (order 1 first).
enum SpectraStatus spectra_sequence_from_values(const double *values,
                                                size_t len,
                                                struct SpectraSequence **out);

// Free cumulants c_1..c_{n_max} of a moment sequence.
enum SpectraStatus spectra_cumulants_from_moments(const struct SpectraSequence *moments,
                                                  size_t n_max,
                                                  struct SpectraSequence **out);

size_t spectra_sequence_len(const struct SpectraSequence *s);

// Borrowed pointer to the values; valid until the sequence is freed.
const double *spectra_sequence_values(const struct SpectraSequence *s);

// Element of order `n` (1-based).
enum SpectraStatus spectra_sequence_get(const struct SpectraSequence *s, size_t n, double *out);

void spectra_sequence_free(struct SpectraSequence *s);

// Number of nodes, including an atom at zero if present.
size_t spectra_rule_len(const struct SpectraRule *r);

const double *spectra_rule_nodes(const struct SpectraRule *r);

const double *spectra_rule_weights(const struct SpectraRule *r);

// True when the rule was cut short after a breakdown.
bool spectra_rule_truncated(const struct SpectraRule *r);

// E{1/(1 + snr X)}.
enum SpectraStatus spectra_rule_mmse(const struct SpectraRule *r, double snr, double *out);

// Optimum-receiver spectral efficiency in bit/s/Hz.
enum SpectraStatus spectra_rule_efficiency_opt(const struct SpectraRule *r,
                                               double alpha,
                                               double beta,
                                               double snr,
                                               double *out);

// Linear MMSE receiver spectral efficiency (lower bound form).
enum SpectraStatus spectra_rule_efficiency_mmse(const struct SpectraRule *r,
                                                double alpha,
                                                double beta,
                                                double snr,
                                                double *out);

void spectra_rule_free(struct SpectraRule *r);

#endif  /* SPECTRA_CDMA_H */
