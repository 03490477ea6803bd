"""Symbolic derivations used to freeze expected values in the C++ tests.

Run with: python3 tests/oracles/symbolic_oracles.py
Every number printed here is hard-coded into a test; nothing in the C++
library depends on this script.
"""
import sympy as sp


def christoffel(g, xs):
    n = len(xs)
    gi = sp.simplify(g.inv())
    return [[[sp.simplify(sum(gi[h, l] * (sp.diff(g[j, l], xs[i]) + sp.diff(g[i, l], xs[j])
                                          - sp.diff(g[i, j], xs[l])) for l in range(n)) / 2)
              for j in range(n)] for i in range(n)] for h in range(n)]


def riemann(G, xs):
    # R^h_{kji} = d_k G^h_{ji} - d_j G^h_{ki} + G^h_{kl} G^l_{ji} - G^h_{jl} G^l_{ki}
    n = len(xs)
    R = {}
    for h in range(n):
        for k in range(n):
            for j in range(n):
                for i in range(n):
                    R[h, k, j, i] = sp.simplify(
                        sp.diff(G[h][j][i], xs[k]) - sp.diff(G[h][k][i], xs[j])
                        + sum(G[h][k][l] * G[l][j][i] - G[h][j][l] * G[l][k][i] for l in range(n)))
    return R


def scalar(g, xs):
    n = len(xs)
    G = christoffel(g, xs)
    Rm = riemann(G, xs)
    ric = sp.Matrix(n, n, lambda j, i: sum(Rm[h, h, j, i] for h in range(n)))
    return sp.simplify(sum(g.inv()[i, j] * ric[i, j] for i in range(n) for j in range(n))), G


def lie_metric(g, V, xs):
    n = len(xs)
    return sp.Matrix(n, n, lambda i, j: sp.simplify(
        sum(V[k] * sp.diff(g[i, j], xs[k]) + g[k, j] * sp.diff(V[k], xs[i])
            + g[i, k] * sp.diff(V[k], xs[j]) for k in range(n))))


def laplacian(g, f, xs):
    n = len(xs)
    det = sp.simplify(g.det())
    gi = g.inv()
    return sp.simplify(sum(sp.diff(sp.sqrt(det) * gi[i, j] * sp.diff(f, xs[j]), xs[i])
                           for i in range(n) for j in range(n)) / sp.sqrt(det))


x, y, th, ph, kappa = sp.symbols('x y theta phi kappa', real=True)

# cigar
g = sp.diag(1 / (1 + x**2 + y**2), 1 / (1 + x**2 + y**2))
R, G = scalar(g, [x, y])
print("cigar R =", sp.factor(R))
V = [kappa * x, kappa * y]
eq = sp.simplify(lie_metric(g, V, [x, y]) - 2 * R * g)
sol = sp.solve(eq[0, 0], kappa)
print("cigar kappa =", sol)
k = sol[0]
V = [k * x, k * y]
dR = laplacian(g, R, [x, y])
print("cigar Delta R =", sp.factor(dR), " at 0:", dR.subs({x: 0, y: 0}))
VR = sp.simplify(V[0] * sp.diff(R, x) + V[1] * sp.diff(R, y))
print("cigar V(R) =", sp.factor(VR))
litA = 2 * (1 - 2) * dR
print("cigar (iv) literal - LHS =", sp.factor(sp.simplify(litA - VR)),
      " at 0:", sp.simplify(litA - VR).subs({x: 0, y: 0}))
print("cigar (iv) contraction candidate - LHS =", sp.simplify(litA - 2 * R * R - VR))
print("cigar Gamma at origin:", [[[G[h][i][j].subs({x: 0, y: 0}) for j in range(2)]
                                   for i in range(2)] for h in range(2)])
print("cigar R at (1,0) =", R.subs({x: 1, y: 0}), " dR/dx at (1,0) =", sp.diff(R, x).subs({x: 1, y: 0}))

# unit round 2-sphere
gs = sp.diag(1, sp.sin(th)**2)
Rs, Gs = scalar(gs, [th, ph])
print("sphere R =", Rs)
print("Gamma^th_phph(pi/4) =", sp.simplify(Gs[0][1][1].subs(th, sp.pi / 4)),
      " Gamma^ph_thph(pi/4) =", sp.simplify(Gs[1][0][1].subs(th, sp.pi / 4)))

# almost soliton on the unit sphere: V = grad(cos theta) = -sin(theta) d_theta
Va = [-sp.sin(th), 0]
L = lie_metric(gs, Va, [th, ph])
print("almost sphere: L_V g / g =", sp.simplify(L[0, 0] / gs[0, 0]), sp.simplify(L[1, 1] / gs[1, 1]))

# 3-sphere chart (psi, theta, phi)
ps, t2, p2 = sp.symbols('psi t2 p2', real=True)
g3 = sp.diag(1, sp.sin(ps)**2, sp.sin(ps)**2 * sp.sin(t2)**2)
R3, _ = scalar(g3, [ps, t2, p2])
print("unit S^3 R =", R3)
L3 = lie_metric(g3, [-sp.sin(ps), 0, 0], [ps, t2, p2])
print("almost S^3: L_V g / g =", [sp.simplify(L3[i, i] / g3[i, i]) for i in range(3)])

# perturbed torus
eps = sp.Rational(1, 10)
u = eps * sp.sin(x) * sp.sin(y)
gp = sp.diag(sp.exp(2 * u), sp.exp(2 * u))
Rp, _ = scalar(gp, [x, y])
print("perturbed torus R(1,2) =", sp.N(Rp.subs({x: 1, y: 2}), 20))
