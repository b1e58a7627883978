#include "mvb/lift.hpp"

#include "mvb/atlas.hpp"
#include "mvb/corepull.hpp"
#include "mvb/errors.hpp"
#include "mvb/format.hpp"

namespace mvb {

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c).str());
    rows.push_back(row);
  }
  return rows;
}

Vector random_vector(std::size_t n, Rng& rng) {
  Vector v(n);
  for (auto& x : v) x = rng.small_rational();
  return v;
}

void append(Vector& out, const std::vector<Rational>& v) { out.insert(out.end(), v.begin(), v.end()); }

Vector take(const Vector& v, std::size_t& pos, std::size_t n) {
  if (pos + n > v.size()) throw DimensionMismatch("coordinate vector too short");
  Vector r(v.begin() + static_cast<long>(pos), v.begin() + static_cast<long>(pos + n));
  pos += n;
  return r;
}

Matrix take_matrix(const Vector& v, std::size_t& pos, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = v.at(pos++);
  return m;
}

Matrix from_columns(std::size_t rows, const std::vector<Vector>& cols) {
  Matrix m(rows, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) m.set_column(c, cols[c]);
  return m;
}

Vector sub(const Vector& a, const Vector& b) { return add(a, scaled(Rational(-1), b)); }

int idx(const IndexSet& J) { return layout(3).index(J); }

// evaluates a splitting of the presentation on fam at given local slots,
// returning an element of the ambient presentation
BundleElement split_elem(const AtlasPresentation& T, const Splitting& s, const BlockFamily& fam, int chart,
                         int point, const std::vector<Vector>& slots) {
  const AtlasPresentation& P = *s.m.target;
  const CubeLayout& L = layout(P.n());
  Coords v = zero_coords(vacant_dims(P.dims()));
  for (int q = 1; q <= P.n(); ++q) v[L.index(IndexSet{q})] = slots.at(q - 1);
  const Coords out = s.m.at(chart, point).evaluate(v);
  IndexSet node;
  for (const auto& b : fam.blocks()) node = node.unite(b);
  return BundleElement{node, chart, point, fam.scatter(out, T.dims())};
}

void require_presentation(const AtlasPresentation& T, const Splitting& s, const std::string& name) {
  if (!(*s.m.target == subbundle(T, triple_family(name))))
    throw SemanticError("the splitting given for " + name + " is not on the corresponding presentation");
}

}  // namespace

// ---------------------------------------------------------------- n = 2

Vector flatten(const LinearSection& s) {
  Vector v = s.b;
  append(v, s.X.data());
  return v;
}

LinearSection unflatten_linear(const AtlasPresentation& D, const Vector& v) {
  const auto d1 = D.dims().dim({1}), d2 = D.dims().dim({2}), d12 = D.dims().dim({1, 2});
  std::size_t pos = 0;
  LinearSection s;
  s.b = take(v, pos, d2);
  s.X = take_matrix(v, pos, d12, d1);
  if (pos != v.size()) throw DimensionMismatch("coordinate vector too long");
  return s;
}

BundleElement evaluate(const AtlasPresentation& D, int point, const LinearSection& s, const Vector& a) {
  if (D.n() != 2) throw InvalidArgument("linear sections need a double vector bundle");
  const CubeLayout& L = layout(2);
  Coords c = zero_coords(D.dims());
  c[L.index({1})] = a;
  c[L.index({2})] = s.b;
  c[L.index({1, 2})] = s.X.apply(a);
  return BundleElement{IndexSet{1, 2}, D.canonical_chart(point), point, std::move(c)};
}

LinearSection read_linear_section(const AtlasPresentation& D, int point,
                                  const std::function<BundleElement(const Vector&)>& f) {
  const CubeLayout& L = layout(2);
  const int c = D.canonical_chart(point);
  const auto d1 = D.dims().dim({1}), d12 = D.dims().dim({1, 2});
  auto at = [&](const Vector& a) { return transport(D, f(a), c).comps; };
  const Coords z = at(zeros(d1));
  LinearSection s{z[L.index({2})], Matrix(d12, d1)};
  for (std::size_t i = 0; i < d1; ++i) s.X.set_column(i, at(basis_vector(d1, i))[L.index({1, 2})]);
  Rng rng(0x11 + point);
  for (int t = 0; t < 3; ++t) {
    const Vector a = random_vector(d1, rng);
    if (at(a) != evaluate(D, point, s, a).comps)
      throw SemanticError("map is not a linear section at point " + D.base()[point]);
  }
  return s;
}

LinearSection tilde(const AtlasPresentation& D, int point, const Matrix& phi) {
  const CubeLayout& L = layout(2);
  const auto d1 = D.dims().dim({1}), d12 = D.dims().dim({1, 2});
  if (phi.rows() != d12 || phi.cols() != d1) throw DimensionMismatch("tilde: phi has the wrong shape");
  const int c = D.canonical_chart(point);
  return read_linear_section(D, point, [&](const Vector& a) {
    Coords za = zero_coords(D.dims()), core = zero_coords(D.dims());
    za[L.index({1})] = a;
    core[L.index({1, 2})] = phi.apply(a);
    // 0^D_a +_B phi(a)
    return add(D, BundleElement{IndexSet{1, 2}, c, point, za}, BundleElement{IndexSet{1, 2}, c, point, core}, 1);
  });
}

LinearSection hat(const AtlasPresentation& D, int point, const Vector& b, const Splitting& s) {
  if (!(*s.m.target == D)) throw SemanticError("hat: the splitting belongs to another presentation");
  const CubeLayout& L = layout(2);
  const int c = D.canonical_chart(point);
  const Gauge& g = s.m.at(c, point);
  if (b.size() != D.dims().dim({2})) throw DimensionMismatch("hat: b has the wrong size");
  return read_linear_section(D, point, [&](const Vector& a) {
    Coords v = zero_coords(g.source());
    v[L.index({1})] = a;
    v[L.index({2})] = b;
    return BundleElement{IndexSet{1, 2}, c, point, g.evaluate(v)};
  });
}

LinearSection combine(const AtlasPresentation& D, int point, const Rational& f, const LinearSection& s1,
                      const Rational& g, const LinearSection& s2) {
  return read_linear_section(D, point, [&](const Vector& a) {
    return add(D, scale(D, f, evaluate(D, point, s1, a), 2), scale(D, g, evaluate(D, point, s2, a), 2), 2);
  });
}

Certificate fat_sequence(std::shared_ptr<const AtlasPresentation> D) {
  require_valid(*D);
  if (D->n() != 2) throw InvalidArgument("fat sequence: n must be 2");
  Certificate cert("0 -> Hom(A,C) -> linear sections over A -> sections of B -> 0 is exact");
  const auto d1 = D->dims().dim({1}), d2 = D->dims().dim({2}), d12 = D->dims().dim({1, 2});
  const std::size_t dimHom = d1 * d12, dimGamma = d2 + d1 * d12;
  const Splitting s = find_splitting(D);
  for (std::size_t pi = 0; pi < D->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    std::vector<Vector> tcols, hcols;
    for (std::size_t k = 0; k < dimHom; ++k) {
      Matrix phi(d12, d1);
      phi(k / d1, k % d1) = 1;
      tcols.push_back(flatten(tilde(*D, p, phi)));
    }
    for (std::size_t j = 0; j < d2; ++j) hcols.push_back(flatten(hat(*D, p, basis_vector(d2, j), s)));
    const Matrix T = from_columns(dimGamma, tcols), H = from_columns(dimGamma, hcols);
    Matrix P(d2, dimGamma);
    for (std::size_t j = 0; j < d2; ++j) P(j, j) = 1;
    const json at{{"point", D->base()[p]}};
    if (rank(T) != dimHom) cert.fail({{"reason", "tilde is not injective"}, {"at", at}});
    if (!(P * T).is_zero()) cert.fail({{"reason", "pi o tilde is not zero"}, {"at", at}});
    if (!(P * H).is_identity() && d2) cert.fail({{"reason", "pi o hat is not the identity"}, {"at", at}});
    if (rank(P) + rank(T) != dimGamma) cert.fail({{"reason", "image of tilde differs from the kernel of pi"}, {"at", at}});
  }
  cert.witnesses = {{"points", D->base().size()}, {"dim_hom", dimHom}, {"dim_sections", dimGamma}, {"dim_base_sections", d2}};
  return cert;
}

Splitting local_split_double(std::shared_ptr<const AtlasPresentation> D, const LocalSplitOptions& opt) {
  require_valid(*D);
  if (D->n() != 2) throw InvalidArgument("local_split_double: n must be 2");
  const CubeLayout& L = layout(2);
  const int i1 = L.index({1}), i2 = L.index({2}), i12 = L.index({1, 2});
  const IndexSet top{1, 2};
  const DimAssignment vd = vacant_dims(D->dims());
  auto src = std::make_shared<const AtlasPresentation>(associated_vacant(*D));
  std::map<int, Gauge> canon;
  for (std::size_t pi = 0; pi < D->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    const int c = D->canonical_chart(p);
    // Sigma_U(a, b) = sum_i beta_i ._A sigma(a, b_i) in chart U
    auto local = [&](int u, const Vector& a, const Vector& b) {
      Coords base = zero_coords(D->dims());
      base[i1] = a;
      BundleElement acc{top, u, p, base};
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i].is_zero()) continue;
        Coords x = zero_coords(D->dims());
        x[i1] = a;
        x[i2] = basis_vector(b.size(), i);
        if (opt.sigma) x[i12] = opt.sigma(*D, u, p, a, x[i2]);
        acc = add(*D, acc, scale(*D, b[i], BundleElement{top, u, p, x}, 2), 2);
      }
      return transport(*D, acc, c);
    };
    auto pasted = [&](const Coords& v) {
      const auto charts = D->charts_at(p);
      if (opt.strategy == PasteStrategy::LeastChart) return local(c, v[i1], v[i2]);
      Coords z = zero_coords(D->dims());
      z[i2] = v[i2];
      BundleElement acc{top, c, p, z};
      const Rational w(1, static_cast<long>(charts.size()));
      for (int u : charts) {
        const Gauge& t = D->transition(c, u, p);
        const BundleElement X = local(u, t.linear_part(i1).apply(v[i1]), t.linear_part(i2).apply(v[i2]));
        acc = add(*D, acc, scale(*D, w, X, 1), 1);
      }
      return acc;
    };
    Gauge g = tabulate(vd, D->dims(), [&](const Coords& v) { return pasted(v).comps; });
    Rng rng(0x2d + pi);
    Coords v = zero_coords(vd);
    v[i1] = random_vector(vd[i1], rng);
    v[i2] = random_vector(vd[i2], rng);
    if (g.evaluate(v) != pasted(v).comps)
      throw SemanticError("local splitting is not bilinear at point " + D->base()[p] +
                          " (the core-sequence section must be linear in a)");
    canon[p] = std::move(g);
  }
  return Splitting{morphism_from_canonical(src, D, canon)};
}

// ---------------------------------------------------------------- n = 3

TripleShape::TripleShape(const DimAssignment& d)
    : a(d.dim({1})), b(d.dim({2})), c(d.dim({3})), ab(d.dim({1, 2})), ca(d.dim({1, 3})), bc(d.dim({2, 3})),
      s(d.dim({1, 2, 3})) {}

Vector flatten(const DoublyLinearSection& s) {
  Vector v = s.c;
  append(v, s.XF.data());
  append(v, s.XE.data());
  append(v, s.R.entries());
  append(v, s.Q.data());
  return v;
}

Vector flatten(const SectionPair& p) {
  Vector v = p.c;
  append(v, p.XF.data());
  append(v, p.XE.data());
  return v;
}

Vector flatten(const Mor2& m) {
  Vector v = m.P.entries();
  append(v, m.Q.data());
  return v;
}

DoublyLinearSection unflatten_section(const TripleShape& sh, const Vector& v) {
  std::size_t pos = 0;
  DoublyLinearSection s;
  s.c = take(v, pos, sh.c);
  s.XF = take_matrix(v, pos, sh.ca, sh.a);
  s.XE = take_matrix(v, pos, sh.bc, sh.b);
  s.R = MultiTensor(sh.s, {sh.a, sh.b}, take(v, pos, sh.s * sh.a * sh.b));
  s.Q = take_matrix(v, pos, sh.s, sh.ab);
  if (pos != v.size()) throw DimensionMismatch("coordinate vector too long");
  return s;
}

SectionPair unflatten_pair(const TripleShape& sh, const Vector& v) {
  std::size_t pos = 0;
  SectionPair p;
  p.c = take(v, pos, sh.c);
  p.XF = take_matrix(v, pos, sh.ca, sh.a);
  p.XE = take_matrix(v, pos, sh.bc, sh.b);
  if (pos != v.size()) throw DimensionMismatch("coordinate vector too long");
  return p;
}

Mor2 unflatten_mor2(const TripleShape& sh, const Vector& v) {
  std::size_t pos = 0;
  Mor2 m;
  m.P = MultiTensor(sh.s, {sh.a, sh.b}, take(v, pos, sh.s * sh.a * sh.b));
  m.Q = take_matrix(v, pos, sh.s, sh.ab);
  if (pos != v.size()) throw DimensionMismatch("coordinate vector too long");
  return m;
}

BundleElement evaluate(const AtlasPresentation& T, int point, const DoublyLinearSection& s, const Coords& d) {
  if (T.n() != 3) throw InvalidArgument("doubly linear sections need a triple vector bundle");
  Coords out = zero_coords(T.dims());
  const Vector& a = d[idx({1})];
  const Vector& b = d[idx({2})];
  const Vector& k = d[idx({1, 2})];
  out[idx({1})] = a;
  out[idx({2})] = b;
  out[idx({1, 2})] = k;
  out[idx({3})] = s.c;
  out[idx({1, 3})] = s.XF.apply(a);
  out[idx({2, 3})] = s.XE.apply(b);
  out[idx({1, 2, 3})] = add(mvb::apply(s.R, std::vector<Vector>{a, b}), s.Q.apply(k));
  return BundleElement{IndexSet::range(3), T.canonical_chart(point), point, std::move(out)};
}

DoublyLinearSection read_doubly_linear(const AtlasPresentation& T, int point,
                                       const std::function<BundleElement(const Coords&)>& f) {
  const TripleShape sh(T.dims());
  const int c = T.canonical_chart(point);
  auto at = [&](const Vector& a, const Vector& b, const Vector& k) {
    Coords d = zero_coords(T.dims());
    d[idx({1})] = a;
    d[idx({2})] = b;
    d[idx({1, 2})] = k;
    return transport(T, f(d), c).comps;
  };
  const Vector za = zeros(sh.a), zb = zeros(sh.b), zk = zeros(sh.ab);
  const Coords z = at(za, zb, zk);
  const int s123 = idx({1, 2, 3});
  DoublyLinearSection s{z[idx({3})], Matrix(sh.ca, sh.a), Matrix(sh.bc, sh.b), MultiTensor(sh.s, {sh.a, sh.b}),
                        Matrix(sh.s, sh.ab)};
  std::vector<Vector> fa(sh.a), fb(sh.b);
  for (std::size_t i = 0; i < sh.a; ++i) {
    const Coords y = at(basis_vector(sh.a, i), zb, zk);
    s.XF.set_column(i, y[idx({1, 3})]);
    fa[i] = y[s123];
  }
  for (std::size_t j = 0; j < sh.b; ++j) {
    const Coords y = at(za, basis_vector(sh.b, j), zk);
    s.XE.set_column(j, y[idx({2, 3})]);
    fb[j] = y[s123];
  }
  for (std::size_t i = 0; i < sh.a; ++i)
    for (std::size_t j = 0; j < sh.b; ++j) {
      const Vector r = sub(sub(add(at(basis_vector(sh.a, i), basis_vector(sh.b, j), zk)[s123], z[s123]), fa[i]), fb[j]);
      for (std::size_t o = 0; o < sh.s; ++o) s.R.at(o, i * sh.b + j) = r[o];
    }
  for (std::size_t l = 0; l < sh.ab; ++l) s.Q.set_column(l, sub(at(za, zb, basis_vector(sh.ab, l))[s123], z[s123]));
  Rng rng(0x33 + point);
  for (int t = 0; t < 4; ++t) {
    Coords d = zero_coords(T.dims());
    d[idx({1})] = random_vector(sh.a, rng);
    d[idx({2})] = random_vector(sh.b, rng);
    d[idx({1, 2})] = random_vector(sh.ab, rng);
    if (at(d[idx({1})], d[idx({2})], d[idx({1, 2})]) != evaluate(T, point, s, d).comps)
      throw SemanticError("map is not a doubly linear section at point " + T.base()[point]);
  }
  return s;
}

DoublyLinearSection tilde(const AtlasPresentation& T, int point, const Mor2& phi) {
  const int c = T.canonical_chart(point);
  const IndexSet top = IndexSet::range(3);
  return read_doubly_linear(T, point, [&](const Coords& dc) {
    const BundleElement d{IndexSet{1, 2}, c, point, dc};
    Coords sc = zero_coords(T.dims());
    sc[idx(top)] = add(mvb::apply(phi.P, std::vector<Vector>{dc[idx({1})], dc[idx({2})]}), phi.Q.apply(dc[idx({1, 2})]));
    const BundleElement s{top, c, point, sc};
    const BundleElement zb = zero_lift(T, zero_lift(T, project(T, d, 1), IndexSet{1, 2}), top);
    // 0^T_d +_E (0^T_{0^D_b} +_F s)
    return add(T, zero_lift(T, d, top), add(T, zb, s, 2), 1);
  });
}

SectionPair project_pair(const DoublyLinearSection& s) { return SectionPair{s.c, s.XF, s.XE}; }

DoublyLinearSection hat(const AtlasPresentation& T, int point, const SectionPair& xi) {
  const int c = T.canonical_chart(point);
  const IndexSet top = IndexSet::range(3);
  return read_doubly_linear(T, point, [&](const Coords& dc) {
    // chart-zero splitting of (T; E, F; C) applied to (xi^E(b), xi^F(a))
    Coords w = zero_coords(T.dims());
    w[idx({1})] = dc[idx({1})];
    w[idx({2})] = dc[idx({2})];
    w[idx({3})] = xi.c;
    w[idx({1, 3})] = xi.XF.apply(dc[idx({1})]);
    w[idx({2, 3})] = xi.XE.apply(dc[idx({2})]);
    const BundleElement W{top, c, point, w};
    // the D-core part of d rides along in the core of (T; E, F; C)
    Coords l = zero_coords(T.dims());
    l[idx({3})] = xi.c;
    l[idx({1, 2})] = dc[idx({1, 2})];
    const BundleElement Lc{top, c, point, l};
    return add(T, W, add(T, zero_lift(T, project(T, W, 1), top), Lc, 2), 1);
  });
}

DoublyLinearSequence doubly_linear_sequence(std::shared_ptr<const AtlasPresentation> T) {
  require_valid(*T);
  if (T->n() != 3) throw InvalidArgument("doubly linear sequence: n must be 3");
  const TripleShape sh(T->dims());
  DoublyLinearSequence out;
  out.exactness = Certificate("0 -> Mor2(D,S) -> doubly linear sections -> pairs of linear sections -> 0 is exact");
  Certificate& cert = out.exactness;
  for (std::size_t pi = 0; pi < T->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    std::vector<Vector> tcols, hcols;
    for (std::size_t k = 0; k < sh.mor2(); ++k)
      tcols.push_back(flatten(tilde(*T, p, unflatten_mor2(sh, basis_vector(sh.mor2(), k)))));
    for (std::size_t k = 0; k < sh.pairs(); ++k)
      hcols.push_back(flatten(hat(*T, p, unflatten_pair(sh, basis_vector(sh.pairs(), k)))));
    Matrix P(sh.pairs(), sh.sections());
    for (std::size_t k = 0; k < sh.pairs(); ++k) P(k, k) = 1;
    const Matrix Tm = from_columns(sh.sections(), tcols), Hm = from_columns(sh.sections(), hcols);
    const json at{{"point", T->base()[p]}};
    if (rank(Tm) != sh.mor2()) cert.fail({{"reason", "tilde is not injective"}, {"at", at}});
    if (!(P * Tm).is_zero()) cert.fail({{"reason", "pi o tilde is not zero"}, {"at", at}});
    if (sh.pairs() && !(P * Hm).is_identity()) cert.fail({{"reason", "pi is not surjective (pi o hat != id)"}, {"at", at}});
    if (rank(P) + rank(Tm) != sh.sections()) cert.fail({{"reason", "dimension count fails"}, {"at", at}});
    for (const auto& v : kernel_basis(P))
      if (!image_contains(Tm, v)) {
        cert.fail({{"reason", "kernel of pi not in the image of tilde"}, {"at", at}});
        break;
      }
    out.tilde[p] = Tm;
    out.pi[p] = P;
    out.hat[p] = Hm;
  }
  cert.witnesses = {{"points", T->base().size()},
                    {"dim_mor2", sh.mor2()},
                    {"dim_sections", sh.sections()},
                    {"dim_pairs", sh.pairs()}};
  return out;
}

BlockFamily triple_family(const std::string& name) {
  if (name == "D") return BlockFamily(3, {IndexSet{1}, IndexSet{2}});
  if (name == "E") return BlockFamily(3, {IndexSet{2}, IndexSet{3}});
  if (name == "F") return BlockFamily(3, {IndexSet{1}, IndexSet{3}});
  if (name == "LDE") return BlockFamily(3, {IndexSet{1, 3}, IndexSet{2}});
  if (name == "LFD") return BlockFamily(3, {IndexSet{1}, IndexSet{2, 3}});
  if (name == "LEF") return BlockFamily(3, {IndexSet{1, 2}, IndexSet{3}});
  throw InvalidArgument("unknown face or core \"" + name + "\"");
}

BundleMorphism face_morphism(const BundleMorphism& m, const BlockFamily& fam) {
  BundleMorphism out{std::make_shared<const AtlasPresentation>(subbundle(*m.source, fam)),
                     std::make_shared<const AtlasPresentation>(subbundle(*m.target, fam)),
                     {}};
  for (const auto& [key, g] : m.data) out.data[key] = fam.restrict(g);
  return out;
}

Decomposition identity_decomposition(std::shared_ptr<const AtlasPresentation> A) {
  auto src = std::make_shared<const AtlasPresentation>(associated_decomposed(*A));
  std::map<int, Gauge> canon;
  for (std::size_t p = 0; p < A->base().size(); ++p) canon[static_cast<int>(p)] = Gauge::identity(A->dims());
  return Decomposition{morphism_from_canonical(src, A, canon)};
}

LiftData lift_from_decomposition(std::shared_ptr<const AtlasPresentation> T, const Decomposition& S) {
  if (T->n() != 3) throw InvalidArgument("horizontal lifts: n must be 3");
  if (!(*S.m.target == *T)) throw SemanticError("decomposition of a different presentation");
  auto split_of = [&](const char* name) {
    return splitting_of(Decomposition{face_morphism(S.m, triple_family(name))});
  };
  LiftData data{split_of("D"), split_of("E"), split_of("F"), split_of("LDE"), split_of("LFD"), {}};
  const TripleShape sh(T->dims());
  for (std::size_t pi = 0; pi < T->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    const int c = T->canonical_chart(p);
    const Gauge& Sc = S.m.at(c, p);
    const Gauge Si = invert(Sc);
    auto lift = [&](const SectionPair& xi) {
      Matrix phiF(sh.ca, sh.a), phiE(sh.bc, sh.b);
      for (std::size_t i = 0; i < sh.a; ++i) {
        Coords y = zero_coords(T->dims());
        y[idx({1})] = basis_vector(sh.a, i);
        y[idx({3})] = xi.c;
        y[idx({1, 3})] = xi.XF.column(i);
        phiF.set_column(i, Si.evaluate(y)[idx({1, 3})]);
      }
      for (std::size_t j = 0; j < sh.b; ++j) {
        Coords y = zero_coords(T->dims());
        y[idx({2})] = basis_vector(sh.b, j);
        y[idx({3})] = xi.c;
        y[idx({2, 3})] = xi.XE.column(j);
        phiE.set_column(j, Si.evaluate(y)[idx({2, 3})]);
      }
      return read_doubly_linear(*T, p, [&](const Coords& d) {
        Coords dd = zero_coords(T->dims());
        for (const auto& J : {IndexSet{1}, IndexSet{2}, IndexSet{1, 2}}) dd[idx(J)] = d[idx(J)];
        const Coords x = Si.evaluate(dd);
        Coords y = zero_coords(T->dims());
        for (const auto& J : {IndexSet{1}, IndexSet{2}, IndexSet{1, 2}}) y[idx(J)] = x[idx(J)];
        y[idx({3})] = xi.c;
        y[idx({1, 3})] = phiF.apply(x[idx({1})]);
        y[idx({2, 3})] = phiE.apply(x[idx({2})]);
        return BundleElement{IndexSet::range(3), c, p, Sc.evaluate(y)};
      });
    };
    std::vector<Vector> cols;
    for (std::size_t k = 0; k < sh.pairs(); ++k)
      cols.push_back(flatten(lift(unflatten_pair(sh, basis_vector(sh.pairs(), k)))));
    Matrix H = from_columns(sh.sections(), cols);
    Rng rng(0x44 + pi);
    const Vector v = random_vector(sh.pairs(), rng);
    if (H.apply(v) != flatten(lift(unflatten_pair(sh, v))))
      throw SemanticError("lift read off the decomposition is not linear");
    data.lift.sigma[p] = std::move(H);
  }
  return data;
}

namespace {

// xi^F_c and xi^E_c from the side splittings, as a pair over c
SectionPair side_lift(const AtlasPresentation& T, const LiftData& data, int chart, int point, const Vector& c) {
  const TripleShape sh(T.dims());
  SectionPair xi{c, Matrix(sh.ca, sh.a), Matrix(sh.bc, sh.b)};
  for (std::size_t i = 0; i < sh.a; ++i) {
    const BundleElement e = split_elem(T, data.F, triple_family("F"), chart, point, {basis_vector(sh.a, i), c});
    xi.XF.set_column(i, e.comps[idx({1, 3})]);
  }
  for (std::size_t j = 0; j < sh.b; ++j) {
    const BundleElement e = split_elem(T, data.E, triple_family("E"), chart, point, {basis_vector(sh.b, j), c});
    xi.XE.set_column(j, e.comps[idx({2, 3})]);
  }
  return xi;
}

DoublyLinearSection lifted(const TripleShape& sh, const LiftData& data, int point, const SectionPair& xi) {
  return unflatten_section(sh, data.lift.sigma.at(point).apply(flatten(xi)));
}

Decomposition double_decomposition(std::shared_ptr<const AtlasPresentation> P, const Splitting& s) {
  std::map<IndexSet, Decomposition> cores;
  cores.emplace(IndexSet{1, 2},
                identity_decomposition(std::make_shared<const AtlasPresentation>(
                    subbundle(*P, BlockFamily(2, {IndexSet{1, 2}})))));
  return splitting_to_decomposition(P, s, cores);
}

}  // namespace

Certificate check_lift_compatibility(std::shared_ptr<const AtlasPresentation> T, const LiftData& data) {
  Certificate cert("horizontal lift is compatible with the core splittings of L_DE and L_FD");
  const TripleShape sh(T->dims());
  const IndexSet top = IndexSet::range(3);
  std::size_t checked = 0;
  for (std::size_t pi = 0; pi < T->base().size() && cert.passed; ++pi) {
    const int p = static_cast<int>(pi);
    const int c = T->canonical_chart(p);
    const auto sig = data.lift.sigma.find(p);
    if (sig == data.lift.sigma.end()) throw SemanticError("horizontal lift missing at point " + T->base()[p]);
    if (sig->second.rows() != sh.sections() || sig->second.cols() != sh.pairs())
      throw DimensionMismatch("horizontal lift has the wrong shape at point " + T->base()[p]);
    {
      Matrix Pm(sh.pairs(), sh.sections());
      for (std::size_t k = 0; k < sh.pairs(); ++k) Pm(k, k) = 1;
      if (sh.pairs() && !(Pm * sig->second).is_identity()) {
        cert.fail({{"reason", "sigma does not split pi"}, {"point", T->base()[p]}});
        break;
      }
    }
    // sigma(tilde phi^F, 0^E)(d) = 0^T_d +_E Sigma^{L_DE}(b, phi^F(a))
    for (std::size_t r = 0; r < sh.ca * sh.a && cert.passed; ++r) {
      Matrix phi(sh.ca, sh.a);
      phi(r / sh.a, r % sh.a) = 1;
      const SectionPair xi{zeros(sh.c), phi, Matrix(sh.bc, sh.b)};
      const DimAssignment& dims = T->dims();
      const DoublyLinearSection rhs = read_doubly_linear(*T, p, [&](const Coords& d) {
        const BundleElement l =
            split_elem(*T, data.LDE, triple_family("LDE"), c, p, {phi.apply(d[idx({1})]), d[idx({2})]});
        return add(*T, zero_lift(*T, BundleElement{IndexSet{1, 2}, c, p, d}, top), l, 1);
      });
      ++checked;
      if (flatten(lifted(sh, data, p, xi)) != flatten(rhs))
        cert.fail({{"reason", "sigma(tilde phi^F, 0) differs from the L_DE splitting"},
                   {"phi_F", matrix_json(phi)},
                   {"point", T->base()[p]},
                   {"dims", to_json(dims)}});
    }
    // sigma(0^F, tilde phi^E)(d) = 0^T_d +_F Sigma^{L_FD}(a, phi^E(b))
    for (std::size_t r = 0; r < sh.bc * sh.b && cert.passed; ++r) {
      Matrix phi(sh.bc, sh.b);
      phi(r / sh.b, r % sh.b) = 1;
      const SectionPair xi{zeros(sh.c), Matrix(sh.ca, sh.a), phi};
      const DoublyLinearSection rhs = read_doubly_linear(*T, p, [&](const Coords& d) {
        const BundleElement l =
            split_elem(*T, data.LFD, triple_family("LFD"), c, p, {d[idx({1})], phi.apply(d[idx({2})])});
        return add(*T, zero_lift(*T, BundleElement{IndexSet{1, 2}, c, p, d}, top), l, 2);
      });
      ++checked;
      if (flatten(lifted(sh, data, p, xi)) != flatten(rhs))
        cert.fail({{"reason", "sigma(0, tilde phi^E) differs from the L_FD splitting"},
                   {"phi_E", matrix_json(phi)},
                   {"point", T->base()[p]}});
    }
  }
  cert.witnesses = {{"points", T->base().size()}, {"phi_instances", checked}};
  return cert;
}

TripleSplittings splittings_from_lift(std::shared_ptr<const AtlasPresentation> T, const LiftData& data) {
  if (T->n() != 3) throw InvalidArgument("horizontal lifts: n must be 3");
  for (const auto& [name, s] : std::vector<std::pair<std::string, const Splitting*>>{
           {"D", &data.D}, {"E", &data.E}, {"F", &data.F}, {"LDE", &data.LDE}, {"LFD", &data.LFD}})
    require_presentation(*T, *s, name);
  const TripleShape sh(T->dims());
  const IndexSet top = IndexSet::range(3);
  const BlockFamily fEF = triple_family("LEF");
  auto LEF = std::make_shared<const AtlasPresentation>(subbundle(*T, fEF));
  const DimAssignment vEF = vacant_dims(LEF->dims()), vT = vacant_dims(T->dims());
  const CubeLayout& L2 = layout(2);
  std::map<int, Gauge> canonEF, canonT;
  for (std::size_t pi = 0; pi < T->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    const int c = T->canonical_chart(p);
    auto section_at = [&](const Vector& cv) { return lifted(sh, data, p, side_lift(*T, data, c, p, cv)); };
    // Sigma^{L_EF}(c, k) = sigma(sigma^F_C(c), sigma^E_C(c))(k)
    canonEF[p] = tabulate(vEF, LEF->dims(), [&](const Coords& v) {
      Coords d = zero_coords(T->dims());
      d[idx({1, 2})] = v[L2.index({1})];
      return fEF.gather(evaluate(*T, p, section_at(v[L2.index({2})]), d).comps);
    });
    // Sigma(a, b, c) = sigma(sigma^E_C(c), sigma^F_C(c))(Sigma^D(a, b))
    canonT[p] = tabulate(vT, T->dims(), [&](const Coords& v) {
      const BundleElement d =
          split_elem(*T, data.D, triple_family("D"), c, p, {v[idx({1})], v[idx({2})]});
      return evaluate(*T, p, section_at(v[idx({3})]), d.comps).comps;
    });
  }
  TripleSplittings out{
      Splitting{morphism_from_canonical(std::make_shared<const AtlasPresentation>(associated_vacant(*T)), T, canonT)},
      data.D, data.E, data.F, data.LDE, data.LFD,
      Splitting{morphism_from_canonical(std::make_shared<const AtlasPresentation>(associated_vacant(*LEF)), LEF,
                                        canonEF)}};
  return out;
}

Decomposition decomposition_from_lift(std::shared_ptr<const AtlasPresentation> T, const LiftData& data) {
  const Certificate comp = check_lift_compatibility(T, data);
  if (!comp.passed) throw SemanticError("incompatible horizontal lift: " + comp.counterexample.dump());
  const TripleSplittings sp = splittings_from_lift(T, data);
  std::map<IndexSet, Decomposition> cores;
  cores.emplace(IndexSet{1, 2}, double_decomposition(sp.LEF.m.target, sp.LEF));
  cores.emplace(IndexSet{1, 3}, double_decomposition(sp.LDE.m.target, sp.LDE));
  cores.emplace(IndexSet{2, 3}, double_decomposition(sp.LFD.m.target, sp.LFD));
  return splitting_to_decomposition(T, sp.total, cores);
}

bool lift_data_equal(const LiftData& x, const LiftData& y) {
  return morphism_equal(x.D.m, y.D.m) && morphism_equal(x.E.m, y.E.m) && morphism_equal(x.F.m, y.F.m) &&
         morphism_equal(x.LDE.m, y.LDE.m) && morphism_equal(x.LFD.m, y.LFD.m) && x.lift.sigma == y.lift.sigma;
}

Coords seven_argument_formula(const AtlasPresentation& T, const TripleSplittings& sp, int point, const Coords& x) {
  const int c0 = T.canonical_chart(point);
  const IndexSet top = IndexSet::range(3);
  const Vector &a = x[idx({1})], &b = x[idx({2})], &c = x[idx({3})];
  const Vector &kAB = x[idx({1, 2})], &kCA = x[idx({1, 3})], &kBC = x[idx({2, 3})], &s = x[idx(top)];
  auto el = [&](const IndexSet& node, std::initializer_list<std::pair<IndexSet, const Vector*>> comps) {
    Coords v = zero_coords(T.dims());
    for (const auto& [J, vec] : comps) v[idx(J)] = *vec;
    return BundleElement{node, c0, point, v};
  };
  auto zl = [&](const BundleElement& e) { return zero_lift(T, e, top); };
  auto sp_el = [&](const Splitting& s, const char* fam, std::vector<Vector> slots) {
    return split_elem(T, s, triple_family(fam), c0, point, slots);
  };
  // +_D adds over index 3, +_E over 1, +_F over 2
  const BundleElement Sig = split_elem(T, sp.total, BlockFamily::singletons(3), c0, point, {a, b, c});
  const BundleElement SigD = sp_el(sp.D, "D", {a, b});
  const BundleElement SigF = sp_el(sp.F, "F", {a, c});
  const IndexSet E{2, 3};
  const BundleElement SE =
      add(T, sp_el(sp.E, "E", {b, c}), add(T, el(E, {{IndexSet{3}, &c}}), el(E, {{E, &kBC}}), 3), 2);
  const BundleElement L1 = add(T, Sig, add(T, zl(SigD), sp_el(sp.LFD, "LFD", {a, kBC}), 2), 3);
  const BundleElement L2 = add(T, zl(SigF), sp_el(sp.LEF, "LEF", {kAB, c}), 1);
  const BundleElement left = add(T, L1, L2, 2);
  const BundleElement zb = zl(el(IndexSet{1, 2}, {{IndexSet{2}, &b}}));
  const BundleElement right =
      add(T, add(T, zl(SE), sp_el(sp.LDE, "LDE", {kCA, b}), 3), add(T, zb, el(top, {{top, &s}}), 2), 3);
  return add(T, left, right, 1).comps;
}

Certificate formula_vs_pipeline(std::shared_ptr<const AtlasPresentation> T, const TripleSplittings& sp,
                                const Decomposition& S) {
  Certificate cert("explicit seven-argument formula equals the chain construction");
  const DimAssignment& dims = T->dims();
  std::size_t samples = 0;
  for (std::size_t pi = 0; pi < T->base().size(); ++pi) {
    const int p = static_cast<int>(pi);
    const int c = T->canonical_chart(p);
    const Gauge g = tabulate(dims, dims, [&](const Coords& x) { return seven_argument_formula(*T, sp, p, x); });
    if (auto d = first_difference(g, S.m.at(c, p))) {
      const CubeLayout& L = layout(3);
      cert.fail({{"reason", "formula and pipeline differ"},
                 {"point", T->base()[p]},
                 {"J", to_json(L.subsets[d->first])},
                 {"rho", to_json(L.partitions[d->first][d->second])}});
    }
    Rng rng(0x77 + pi);
    for (int t = 0; t < 4; ++t) {
      Coords x = zero_coords(dims);
      for (auto& v : x)
        for (auto& q : v) q = rng.small_rational();
      ++samples;
      if (seven_argument_formula(*T, sp, p, x) != S.m.at(c, p).evaluate(x))
        cert.fail({{"reason", "formula differs from the pipeline on a sample"}, {"point", T->base()[p]}});
    }
  }
  cert.witnesses = {{"points", T->base().size()}, {"samples", samples}};
  return cert;
}

Certificate lift_round_trip(std::shared_ptr<const AtlasPresentation> T, const Decomposition& S) {
  Certificate cert("decomposition <-> (five double splittings, horizontal lift) round trip");
  const LiftData data = lift_from_decomposition(T, S);
  const Certificate comp = check_lift_compatibility(T, data);
  if (!comp.passed) cert.fail({{"reason", "extracted lift is not compatible"}, {"detail", comp.counterexample}});
  const Decomposition S2 = decomposition_from_lift(T, data);
  const bool dec_ok = morphism_equal(S.m, S2.m);
  if (!dec_ok) cert.fail({{"reason", "rebuilt decomposition differs"}});
  const LiftData data2 = lift_from_decomposition(T, S2);
  const bool lift_ok = lift_data_equal(data, data2);
  if (!lift_ok) cert.fail({{"reason", "re-extracted lift data differs"}});
  const TripleShape sh(T->dims());
  cert.witnesses = {{"points", T->base().size()},
                    {"dim_pairs", sh.pairs()},
                    {"dim_sections", sh.sections()},
                    {"decomposition_reproduced", dec_ok},
                    {"inputs_reproduced", lift_ok}};
  return cert;
}

}  // namespace mvb
