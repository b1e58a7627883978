// Thin front-end: argument parsing and reporting live in the library.
#include <cstdio>

#include "mvb/mvb.h"

int main(int argc, char** argv) {
  char* out = nullptr;
  const int code = mvb_run(argc - 1, argv + 1, &out);
  if (out) {
    std::fputs(out, stdout);
    mvb_string_free(out);
  }
  const char* err = mvb_last_error();
  if (err && *err) std::fputs(err, stderr);
  return code;
}
