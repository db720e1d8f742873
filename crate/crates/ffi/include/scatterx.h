#ifndef SCATTERX_H
#define SCATTERX_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; `1`, `2` and `3` match the command line exit codes.
typedef enum SxStatus {
  SX_STATUS_OK = 0,
  // Malformed JSON or unreadable input.
  SX_STATUS_PARSE = 1,
  // Invalid argument, shape or provision entry.
  SX_STATUS_INVALID = 2,
  // Two sources reached one target under `SX_POLICY_ERROR`.
  SX_STATUS_COLLISION = 3,
  SX_STATUS_NULL_POINTER = 4,
  // A Rust panic was caught at the boundary.
  SX_STATUS_PANIC = 5,
} SxStatus;

typedef enum SxDtype {
  SX_DTYPE_F64 = 0,
  SX_DTYPE_I64 = 1,
} SxDtype;

typedef enum SxPolicy {
  SX_POLICY_ERROR = 0,
  SX_POLICY_FIRST = 1,
  SX_POLICY_LAST = 2,
  SX_POLICY_SUM = 3,
  SX_POLICY_PROD = 4,
} SxPolicy;

// Opaque tensor handle.
typedef struct SxTensor SxTensor;

typedef struct SxScatterReport {
  size_t writes;
  size_t colliding_groups;
  size_t uncovered_targets;
  bool fast_path_used;
} SxScatterReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread.
const char *sx_last_error(void);

// Copies `len` row-major values into a new f64 tensor of the given shape.
//
// # Safety
// `shape` must point to `rank` values and `data` to `len` values (either may
// be null when its length is zero); `out` must be writable.
enum SxStatus sx_tensor_new_f64(const size_t *shape,
                                size_t rank,
                                const double *data,
                                size_t len,
                                struct SxTensor **out);

// i64 counterpart of [`sx_tensor_new_f64`].
//
// # Safety
// As for [`sx_tensor_new_f64`].
enum SxStatus sx_tensor_new_i64(const size_t *shape,
                                size_t rank,
                                const int64_t *data,
                                size_t len,
                                struct SxTensor **out);

// Releases a handle; null is ignored.
//
// # Safety
// `t` must be null or a handle from this library not yet freed.
void sx_tensor_free(struct SxTensor *t);

// # Safety
// `t` must be a live handle; `out` must be writable.
enum SxStatus sx_tensor_dtype(const struct SxTensor *t, enum SxDtype *out);

// Rank of `t`; `0` for null.
//
// # Safety
// `t` must be null or a live handle.
size_t sx_tensor_rank(const struct SxTensor *t);

// Element count of `t`; `0` for null.
//
// # Safety
// `t` must be null or a live handle.
size_t sx_tensor_len(const struct SxTensor *t);

// Copies the extents into `out`, which must hold at least `rank` values.
//
// # Safety
// `t` must be a live handle; `out` must be writable for `cap` values.
enum SxStatus sx_tensor_shape(const struct SxTensor *t, size_t *out, size_t cap);

// Copies the data of an f64 tensor into `out` (at least `len` values).
//
// # Safety
// `t` must be a live handle; `out` must be writable for `cap` values.
enum SxStatus sx_tensor_copy_f64(const struct SxTensor *t, double *out, size_t cap);

// Copies the data of an i64 tensor into `out` (at least `len` values).
//
// # Safety
// `t` must be a live handle; `out` must be writable for `cap` values.
enum SxStatus sx_tensor_copy_i64(const struct SxTensor *t, int64_t *out, size_t cap);

// Parses a tensor document.
//
// # Safety
// `text` must be a nul-terminated string; `out` must be writable.
enum SxStatus sx_tensor_from_json(const char *text, struct SxTensor **out);

// Serializes a tensor; release the string with [`sx_string_free`].
//
// # Safety
// `t` must be a live handle; `out` must be writable.
enum SxStatus sx_tensor_to_json(const struct SxTensor *t, char **out);

// Releases a string from this library; null is ignored.
//
// # Safety
// `s` must be null or a string returned by this library not yet freed.
void sx_string_free(char *s);

// Scatters `updates` into a copy of `background` through the i64 provision
// table `provision`, whose target shape is the background's shape. Runs in
// i64 when both data tensors are i64, in f64 otherwise. `report` may be null.
//
// # Safety
// Tensor arguments must be live handles; `out` must be writable; `report`
// must be null or writable.
enum SxStatus sx_scatter(const struct SxTensor *provision,
                         const struct SxTensor *updates,
                         const struct SxTensor *background,
                         enum SxPolicy policy,
                         struct SxTensor **out,
                         struct SxScatterReport *report);

// `tensor_scatter_nd_update(tensor, indices, updates)`.
//
// # Safety
// As for [`sx_scatter`].
enum SxStatus sx_scatter_nd_update(const struct SxTensor *tensor,
                                   const struct SxTensor *indices,
                                   const struct SxTensor *updates,
                                   enum SxPolicy policy,
                                   struct SxTensor **out,
                                   struct SxScatterReport *report);

// `self.scatter(dim, index, src)`.
//
// # Safety
// As for [`sx_scatter`].
enum SxStatus sx_torch_scatter(const struct SxTensor *self_tensor,
                               size_t dim,
                               const struct SxTensor *index,
                               const struct SxTensor *src,
                               enum SxPolicy policy,
                               struct SxTensor **out,
                               struct SxScatterReport *report);

// Tabulates an x-transformer spec document into a provision table.
//
// # Safety
// `spec_json` must be a nul-terminated string; `out` must be writable.
enum SxStatus sx_compose(const char *spec_json, struct SxTensor **out);

// Analysis report of an i64 provision table as a JSON document. A null
// `target_shape` selects the bounding shape of the entries.
//
// # Safety
// `provision` must be a live handle; `target_shape` must be null or point to
// `target_rank` values; `out` must be writable.
enum SxStatus sx_analyze(const struct SxTensor *provision,
                         const size_t *target_shape,
                         size_t target_rank,
                         char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCATTERX_H */
