#include "mvb/mvb.h"

#include <cstring>
#include <memory>
#include <string>

#include "mvb/commands.hpp"
#include "mvb/errors.hpp"
#include "mvb/format.hpp"
#include "mvb/split.hpp"

struct mvb_atlas {
  std::shared_ptr<const mvb::AtlasPresentation> A;
};

struct mvb_morphism {
  mvb::Decomposition d;
};

namespace {

thread_local std::string g_error;
thread_local long g_offset = -1;

char* copy_out(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

mvb_status fail(mvb_status st, const std::string& msg) {
  g_error = msg;
  return st;
}

template <class F>
mvb_status guarded(F&& f) {
  g_error.clear();
  g_offset = -1;
  try {
    return f();
  } catch (const mvb::SyntaxError& e) {
    g_offset = static_cast<long>(e.byte_offset());
    return fail(MVB_ERR_SYNTAX, e.what());
  } catch (const mvb::SchemaError& e) {
    return fail(MVB_ERR_SCHEMA, e.what());
  } catch (const mvb::InvalidArgument& e) {
    return fail(MVB_ERR_USAGE, e.what());
  } catch (const mvb::Error& e) {
    return fail(MVB_ERR_SEMANTIC, e.what());
  } catch (const std::exception& e) {
    return fail(MVB_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* mvb_version(void) { return "1.0.0"; }
const char* mvb_last_error(void) { return g_error.c_str(); }
long mvb_last_error_offset(void) { return g_offset; }

int mvb_run(int argc, const char* const* argv, char** out) {
  std::vector<std::string> args;
  for (int i = 0; i < argc; ++i) args.emplace_back(argv[i] ? argv[i] : "");
  mvb::RunResult r;
  try {
    r = mvb::run_command(args);
  } catch (const std::exception& e) {
    g_error = e.what();
    if (out) *out = copy_out("");
    return 2;
  }
  g_error = r.err;
  if (out) *out = copy_out(r.out);
  return r.exit_code;
}

void mvb_string_free(char* s) { std::free(s); }

mvb_status mvb_atlas_parse(const char* json_text, size_t len, mvb_atlas** out) {
  if (!json_text || !out) return fail(MVB_ERR_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    mvb::ParsedAtlas pa = mvb::parse_atlas(mvb::parse_text(std::string_view(json_text, len)));
    if (!pa.structural.empty()) return fail(MVB_ERR_SEMANTIC, pa.structural.front());
    *out = new mvb_atlas{std::make_shared<const mvb::AtlasPresentation>(std::move(pa.atlas))};
    return MVB_OK;
  });
}

void mvb_atlas_free(mvb_atlas* a) { delete a; }

int mvb_atlas_n(const mvb_atlas* a) { return a ? a->A->n() : -1; }

mvb_status mvb_atlas_validate(const mvb_atlas* a, size_t* violations) {
  if (!a) return fail(MVB_ERR_USAGE, "null atlas");
  return guarded([&] {
    mvb::ValidationReport r = mvb::validate(*a->A);
    if (violations) *violations = r.violations.size();
    if (r.ok()) return MVB_OK;
    return fail(MVB_ERR_SEMANTIC, r.violations.front().kind + ": " + r.violations.front().message);
  });
}

mvb_status mvb_atlas_to_json(const mvb_atlas* a, char** out) {
  if (!a || !out) return fail(MVB_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = copy_out(mvb::dump(mvb::to_json(*a->A)));
    return MVB_OK;
  });
}

mvb_status mvb_decompose(const mvb_atlas* a, const char* strategy, mvb_morphism** out) {
  if (!a || !out) return fail(MVB_ERR_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    mvb::SplitOptions so;
    if (strategy) so.strategy = mvb::parse_strategy(strategy);
    mvb::require_valid(*a->A);
    *out = new mvb_morphism{mvb::decompose(a->A, so)};
    return MVB_OK;
  });
}

mvb_status mvb_morphism_check_decomposition(const mvb_morphism* m) {
  if (!m) return fail(MVB_ERR_USAGE, "null morphism");
  return guarded([&] {
    mvb::Certificate c = mvb::check_decomposition(m->d);
    if (c.passed) return MVB_OK;
    return fail(MVB_ERR_SEMANTIC, c.counterexample.dump());
  });
}

mvb_status mvb_morphism_to_json(const mvb_morphism* m, char** out) {
  if (!m || !out) return fail(MVB_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = copy_out(mvb::dump(mvb::to_json(m->d.m)));
    return MVB_OK;
  });
}

void mvb_morphism_free(mvb_morphism* m) { delete m; }

}  // extern "C"
