"""Hypothesis strategies for small types, substitutions and terms."""

from hypothesis import strategies as st

from oml.syntax import App, Arrow, Const, Lam, Let, Mu, Pred, TCon, TVar, Var

TVARS = ["t", "u", "v"]
TCONS = ["Int", "Bool"]

tvars = st.sampled_from(TVARS).map(TVar)
tcons = st.sampled_from(TCONS).map(TCon)


def types(max_leaves: int = 6, variables: bool = True):
    leaf = st.one_of(tvars, tcons) if variables else tcons
    return st.recursive(leaf, lambda sub: st.builds(Arrow, sub, sub), max_leaves=max_leaves)


ground_types = types(variables=False)

substs = st.dictionaries(st.sampled_from(TVARS), types(4), max_size=3)

preds = st.builds(lambda a, b: Pred("Elems", (a, b)), types(3), types(3))

NAMES = ["x", "y", "z"]


def exprs(max_leaves: int = 8):
    leaf = st.one_of(st.sampled_from(NAMES).map(Var),
                     st.integers(0, 3).map(Const), st.booleans().map(Const))
    names = st.sampled_from(NAMES)
    return st.recursive(leaf, lambda sub: st.one_of(
        st.builds(Lam, names, sub),
        st.builds(App, sub, sub),
        st.builds(Mu, names, sub),
        st.builds(Let, names, sub, sub),
    ), max_leaves=max_leaves)


def random_term(rng, size: int, atoms, binders=("x", "y", "f")):
    """A random term with at most ``size`` nodes; leaves are bound names or ``atoms``."""
    return _grow(rng, max(size, 1), list(atoms), [], binders)


def _grow(rng, size, atoms, scope, binders):
    if size == 1 or rng.random() < 0.05:
        pool = scope + atoms if scope else atoms
        leaf = rng.choice(pool)
        return leaf if not isinstance(leaf, str) else Var(leaf)
    kind = rng.choices(["lam", "app", "let", "mu"], weights=[4, 6, 2, 1])[0]
    if kind == "app" and size >= 3:
        left = rng.randint(1, size - 2)
        return App(_grow(rng, left, atoms, scope, binders),
                   _grow(rng, size - 1 - left, atoms, scope, binders))
    if kind == "let" and size >= 3:
        x = rng.choice(binders)
        left = rng.randint(1, size - 2)
        return Let(x, _grow(rng, left, atoms, scope, binders),
                   _grow(rng, size - 1 - left, atoms, scope + [x], binders))
    x = rng.choice(binders)
    body = _grow(rng, size - 1, atoms, scope + [x], binders)
    return Mu(x, body) if kind == "mu" else Lam(x, body)
