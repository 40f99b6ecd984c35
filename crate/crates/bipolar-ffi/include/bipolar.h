#ifndef BIPOLAR_H
#define BIPOLAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Opaque map handle.
 */
typedef struct BpMap BpMap;

/**
 * Opaque walk handle.
 */
typedef struct BpWalk BpWalk;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *bp_version(void);

/**
 * Samples the uniform-step walk. Never fails; `n_steps` may be 0.
 */
struct BpWalk *bp_walk_sample_uniform(uintptr_t n_steps, uint64_t seed);

/**
 * Samples the walk conditioned to keep its first coordinate non-negative.
 */
struct BpWalk *bp_walk_sample_conditioned(uintptr_t n_steps, uint64_t seed);

/**
 * Parses the walk text format. Returns null and sets `status` on failure.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string or null; `status` may be
 * null.
 */
struct BpWalk *bp_walk_from_text(const char *text, int *status);

/**
 * Renders the walk text format; free with `bp_string_free`.
 *
 * # Safety
 * `walk` must be a live handle from this library.
 */
char *bp_walk_to_text(const struct BpWalk *walk);

/**
 * Number of steps.
 *
 * # Safety
 * `walk` must be a live handle from this library.
 */
uintptr_t bp_walk_len(const struct BpWalk *walk);

/**
 * # Safety
 * `walk` must come from this library and not already be freed.
 */
void bp_walk_free(struct BpWalk *walk);

/**
 * Builds the triangulation of a walk.
 *
 * # Safety
 * `walk` must be a live handle from this library.
 */
struct BpMap *bp_map_build(const struct BpWalk *walk);

/**
 * Recovers the encoding walk of a bipolar map with no missing edges.
 *
 * # Safety
 * `map` must be a live handle; `status` may be null.
 */
struct BpWalk *bp_map_invert(const struct BpMap *map, int *status);

/**
 * Parses the versioned map JSON.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string or null; `status` may be
 * null.
 */
struct BpMap *bp_map_from_json(const char *text, int *status);

/**
 * Renders the map JSON; free with `bp_string_free`.
 *
 * # Safety
 * `map` must be a live handle from this library.
 */
char *bp_map_to_json(const struct BpMap *map);

/**
 * # Safety
 * `map` must be a live handle from this library.
 */
uintptr_t bp_map_vertex_count(const struct BpMap *map);

/**
 * # Safety
 * `map` must be a live handle from this library.
 */
uintptr_t bp_map_edge_count(const struct BpMap *map);

/**
 * Whether the map passes all structural invariants.
 *
 * # Safety
 * `map` must be a live handle from this library.
 */
bool bp_map_is_valid(const struct BpMap *map);

/**
 * Optimal directed-path length: mode 0 = longest, 1 = shortest. Writes
 * the length to `out_value` and returns a status; `Unreachable` when no
 * directed path exists.
 *
 * # Safety
 * `map` must be a live handle; `out_value` must point to writable memory.
 */
int bp_map_xdp(const struct BpMap *map, int mode, uintptr_t src, uintptr_t dst, int64_t *out_value);

/**
 * Samples a Boltzmann triangulation with right boundary length `r` by
 * rejection; null when the attempt budget is exhausted.
 */
struct BpMap *bp_map_sample_boltzmann(uintptr_t r, uint64_t seed, uintptr_t max_attempts);

/**
 * # Safety
 * `map` must come from this library and not already be freed.
 */
void bp_map_free(struct BpMap *map);

/**
 * Frees strings returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by one of the `*_to_text` or
 * `*_to_json` functions, not yet freed.
 */
void bp_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BIPOLAR_H */
