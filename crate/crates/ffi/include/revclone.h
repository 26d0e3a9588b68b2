#ifndef REVCLONE_H
#define REVCLONE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/* Opaque handles; create and free them only through this API. */

typedef enum RevcloneStatus {
  REVCLONE_STATUS_OK = 0,
  REVCLONE_STATUS_INVALID_ARGUMENT = 1,
  REVCLONE_STATUS_DATA_ERROR = 2,
  REVCLONE_STATUS_IO_ERROR = 3,
  REVCLONE_STATUS_CORRUPT_INDEX = 4,
  REVCLONE_STATUS_VERSION_MISMATCH = 5,
  REVCLONE_STATUS_NGRAM_MISMATCH = 6,
  REVCLONE_STATUS_PANIC = 7,
} RevcloneStatus;

// Opaque search configuration.
typedef struct RevcloneConfig RevcloneConfig;

// Opaque snippet index.
typedef struct RevcloneIndex RevcloneIndex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread.
const char *revclone_last_error_message(void);

// Library version as a static string.
const char *revclone_version(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not be freed twice.
void revclone_string_free(char *s);

// A configuration holding the built-in defaults.
struct RevcloneConfig *revclone_config_default(void);

// Loads a TOML configuration file.
//
// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum RevcloneStatus revclone_config_load(const char *path, struct RevcloneConfig **out);

// # Safety
// `cfg` must come from this library and not be freed twice.
void revclone_config_free(struct RevcloneConfig *cfg);

// Builds an index from a revision dump. A NULL `cfg` means the defaults.
//
// # Safety
// Pointers must be valid or NULL where allowed.
enum RevcloneStatus revclone_index_build_from_dump(const char *dump_path,
                                                   const struct RevcloneConfig *cfg,
                                                   struct RevcloneIndex **out);

// # Safety
// `path` must be a valid C string and `out` a valid pointer.
enum RevcloneStatus revclone_index_load(const char *path, struct RevcloneIndex **out);

// # Safety
// `index` must be a live handle and `path` a valid C string.
enum RevcloneStatus revclone_index_save(const struct RevcloneIndex *index, const char *path);

// Number of indexed revisions; 0 for NULL.
//
// # Safety
// `index` must be a live handle or NULL.
size_t revclone_index_doc_count(const struct RevcloneIndex *index);

// # Safety
// `index` must come from this library and not be freed twice.
void revclone_index_free(struct RevcloneIndex *index);

// Scans a project and writes the recommendation CSV. The number of data
// rows is stored in `out_count` when it is not NULL.
//
// # Safety
// Pointers must be valid or NULL where allowed.
enum RevcloneStatus revclone_scan_project(const struct RevcloneIndex *index,
                                          const struct RevcloneConfig *cfg,
                                          const char *project_dir,
                                          const char *out_csv,
                                          size_t *out_count);

// Scans a project and returns the recommendations as a JSON array,
// including each latest body. Free the result with `revclone_string_free`.
//
// # Safety
// Pointers must be valid or NULL where allowed.
enum RevcloneStatus revclone_scan_project_json(const struct RevcloneIndex *index,
                                               const struct RevcloneConfig *cfg,
                                               const char *project_dir,
                                               char **out_json);

// Character edit distance between two strings, stored in `out`.
//
// # Safety
// `a` and `b` must be valid C strings and `out` a valid pointer.
enum RevcloneStatus revclone_levenshtein(const char *a, const char *b, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REVCLONE_H */
