#ifndef MVB_MVB_H
#define MVB_MVB_H

#include <stddef.h>

#if defined(MVB_BUILDING_LIBRARY)
#define MVB_API __attribute__((visibility("default")))
#else
#define MVB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mvb_status {
  MVB_OK = 0,
  MVB_ERR_SEMANTIC = 1, /* invariant violated; a counterexample is in the last error */
  MVB_ERR_USAGE = 2,    /* bad argument or unreadable input */
  MVB_ERR_SYNTAX = 3,   /* malformed JSON */
  MVB_ERR_SCHEMA = 4,   /* well-formed JSON of the wrong shape */
  MVB_ERR_INTERNAL = 5
} mvb_status;

typedef struct mvb_atlas mvb_atlas;
typedef struct mvb_morphism mvb_morphism;

MVB_API const char* mvb_version(void);

/* Message of the last failed call on this thread; never NULL. */
MVB_API const char* mvb_last_error(void);
/* Byte offset of the last syntax error, or -1. */
MVB_API long mvb_last_error_offset(void);

/* Runs one command as the mvb tool would. *out receives the report
   (free with mvb_string_free); the return value is the exit code. */
MVB_API int mvb_run(int argc, const char* const* argv, char** out);
MVB_API void mvb_string_free(char* s);

MVB_API mvb_status mvb_atlas_parse(const char* json_text, size_t len, mvb_atlas** out);
MVB_API void mvb_atlas_free(mvb_atlas* a);
MVB_API int mvb_atlas_n(const mvb_atlas* a);
/* MVB_OK when the atlas is valid; MVB_ERR_SEMANTIC otherwise, with the
   number of violations written to *violations when non-NULL. */
MVB_API mvb_status mvb_atlas_validate(const mvb_atlas* a, size_t* violations);
MVB_API mvb_status mvb_atlas_to_json(const mvb_atlas* a, char** out);

/* strategy: "least-chart" or "uniform" */
MVB_API mvb_status mvb_decompose(const mvb_atlas* a, const char* strategy, mvb_morphism** out);
MVB_API mvb_status mvb_morphism_check_decomposition(const mvb_morphism* m);
MVB_API mvb_status mvb_morphism_to_json(const mvb_morphism* m, char** out);
MVB_API void mvb_morphism_free(mvb_morphism* m);

#ifdef __cplusplus
}
#endif

#endif
