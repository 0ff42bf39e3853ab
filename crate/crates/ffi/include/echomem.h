#ifndef ECHOMEM_H
#define ECHOMEM_H

#include <stddef.h>
#include <stdint.h>

// Result codes. Zero is success.
typedef enum EchomemStatus {
  ECHOMEM_STATUS_OK = 0,
  ECHOMEM_STATUS_NULL_POINTER = 1,
  ECHOMEM_STATUS_INVALID_INPUT = 2,
  ECHOMEM_STATUS_DOMAIN = 3,
  ECHOMEM_STATUS_BIFURCATION = 4,
  ECHOMEM_STATUS_GRID_MISMATCH = 5,
  ECHOMEM_STATUS_ALIASING = 6,
  ECHOMEM_STATUS_QUADRATURE_NON_CONVERGENCE = 7,
  ECHOMEM_STATUS_STEP_UNDERFLOW = 8,
  ECHOMEM_STATUS_SEARCH = 9,
  ECHOMEM_STATUS_SINGULAR = 10,
  ECHOMEM_STATUS_UNDEFINED_MEASURE = 11,
  ECHOMEM_STATUS_OVERFLOW = 12,
  ECHOMEM_STATUS_INVALID_UTF8 = 13,
  ECHOMEM_STATUS_BUFFER_TOO_SMALL = 14,
  ECHOMEM_STATUS_PANIC = 15,
} EchomemStatus;

// Configured memory protocol.
typedef struct EchomemProtocol EchomemProtocol;

// Sampled complex pulse envelope.
typedef struct EchomemPulse EchomemPulse;

// Inputs to the pulse-area solutions.
typedef struct EchomemAreaConfig {
  double theta_s0;
  double theta_c1;
  double theta_c2;
  double gamma_e;
  double alpha0;
  double length;
  // Non-zero selects backward geometry.
  int32_t backward;
} EchomemAreaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `len`). Returns the buffer size needed for the whole message.
//
// # Safety
// `buf` must be null or valid for `len` bytes of writes.
size_t echomem_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *echomem_version(void);

// Parses a protocol from JSON, e.g. `{"kind": "crib-bwd", "depth": 2.0}`.
// The schema matches the `protocol` object of the CLI configuration.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writes.
enum EchomemStatus echomem_protocol_from_json(const char *json, struct EchomemProtocol **out);

// # Safety
// `p` must be null or a handle from [`echomem_protocol_from_json`] not yet freed.
void echomem_protocol_free(struct EchomemProtocol *p);

// Complex transfer function at offset `omega`.
//
// # Safety
// `p` must be a live protocol handle; `re` and `im` valid for writes.
enum EchomemStatus echomem_protocol_transfer(const struct EchomemProtocol *p,
                                             double omega,
                                             double *re,
                                             double *im);

// Spectral efficiency `|H(omega_k)|^2` for `n` offsets.
//
// # Safety
// `omegas` and `eta` must each be valid for `n` elements.
enum EchomemStatus echomem_protocol_efficiency(const struct EchomemProtocol *p,
                                               const double *omegas,
                                               size_t n,
                                               double *eta);

// Gaussian pulse with `1/e` spectral half width `bandwidth` on a centered
// grid of `samples` points spaced `dt`.
//
// # Safety
// `out` must be valid for writes.
enum EchomemStatus echomem_pulse_gaussian(double bandwidth,
                                          double amplitude,
                                          size_t samples,
                                          double dt,
                                          struct EchomemPulse **out);

// Pulse from `n` complex samples given as separate real and imaginary arrays.
//
// # Safety
// `re` and `im` must each be valid for `n` reads; `out` for writes.
enum EchomemStatus echomem_pulse_from_samples(const double *re,
                                              const double *im,
                                              size_t n,
                                              double dt,
                                              struct EchomemPulse **out);

// # Safety
// `p` must be null or a live pulse handle.
void echomem_pulse_free(struct EchomemPulse *p);

// Number of samples; 0 for a null handle.
//
// # Safety
// `p` must be null or a live pulse handle.
size_t echomem_pulse_len(const struct EchomemPulse *p);

// Copies the envelope into `re`/`im`, which must hold `len` samples.
//
// # Safety
// `re` and `im` must each be valid for `len` writes.
enum EchomemStatus echomem_pulse_samples(const struct EchomemPulse *p,
                                         double *re,
                                         double *im,
                                         size_t len);

// Energy and RMS duration of a pulse.
//
// # Safety
// `energy` and `rms_duration` must be valid for writes.
enum EchomemStatus echomem_pulse_stats(const struct EchomemPulse *p,
                                       double *energy,
                                       double *rms_duration);

// Stores and retrieves `input`. Writes a new pulse handle and the fraction
// of input spectral energy near the grid edge (values above 1e-3 mean the
// grid is too coarse).
//
// # Safety
// Handles must be live; `echo` and `aliasing_fraction` valid for writes.
enum EchomemStatus echomem_protocol_echo(const struct EchomemProtocol *p,
                                         const struct EchomemPulse *input,
                                         struct EchomemPulse **echo,
                                         double *aliasing_fraction);

// Echo-to-input energy ratio.
//
// # Safety
// Handles must be live; `eta` valid for writes.
enum EchomemStatus echomem_energy_efficiency(const struct EchomemPulse *input,
                                             const struct EchomemPulse *echo,
                                             double *eta);

// Optimal resonant depth and efficiency of forward CRIB at offset `omega`.
//
// # Safety
// `depth` and `eta` must be valid for writes.
enum EchomemStatus echomem_crib_forward_optimum(double omega, double *depth, double *eta);

// Comb dephasing factor for a given finesse.
//
// # Safety
// `out` must be valid for writes.
enum EchomemStatus echomem_afc_dephasing(double finesse, double *out);

// Signal area after propagating to `z` in an absorber.
//
// # Safety
// `out` must be valid for writes.
enum EchomemStatus echomem_absorber_area(double z, double theta0, double alpha0, double *out);

// CRIB echo area at `z` (closed form).
//
// # Safety
// `cfg` must be valid for reads, `out` for writes.
enum EchomemStatus echomem_crib_echo_area(const struct EchomemAreaConfig *cfg,
                                          double z,
                                          double *out);

// ROSE echo area at `z` (closed form).
//
// # Safety
// `cfg` must be valid for reads, `out` for writes.
enum EchomemStatus echomem_rose_echo_area(const struct EchomemAreaConfig *cfg,
                                          double z,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ECHOMEM_H */
