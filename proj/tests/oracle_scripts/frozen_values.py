# Brute-force oracle for the frozen values in the C++ tests.
# Enumerates every ordered draw path with mpmath at 50 digits; shares no code
# with the library.
import itertools
from mpmath import mp, mpf, log, sqrt

mp.dps = 50
T = [(mpf(1), mpf(1)), (mpf(-0.5), mpf(1)), (mpf(1), mpf(-2)), (mpf(-0.5), mpf(-2))]
P = [mpf(0.375), mpf(0.375), mpf(0.125), mpf(0.125)]


def hpr(i, phi):
    return 1 + T[i][0] * phi[0] + T[i][1] * phi[1]


def gamma(phi):
    g = mpf(1)
    for i in range(4):
        g *= hpr(i, phi) ** P[i]
    return g


def paths(K):
    for w in itertools.product(range(4), repeat=K):
        pr = mpf(1)
        for j in w:
            pr *= P[j]
        yield w, pr


def expect(phi, K, f):
    return sum(pr * f(w) for w, pr in paths(K))


def log_twr(phi, w, m=0, n=None):
    n = len(w) if n is None else n
    return sum(log(hpr(j, phi)) for j in w[m:n])


def down(phi, K):
    return expect(phi, K, lambda w: min(0, log_twr(phi, w)))


def up(phi, K):
    return expect(phi, K, lambda w: max(0, log_twr(phi, w)))


def dcur(phi, K):
    # Definition: log min_l min{1, TWR_l^K}
    return expect(phi, K, lambda w: min(0, min(log_twr(phi, w, l, K) for l in range(K))))


def dot(i, th):
    return T[i][0] * th[0] + T[i][1] * th[1]


def lin_top(th, w):
    best, idx, acc = mpf(0), 0, mpf(0)
    for l, j in enumerate(w, start=1):
        acc += dot(j, th)
        if acc > best:
            best, idx = acc, l
    return idx


def rho_downX(phi, K):
    return -expect(phi, K, lambda w: min(0, sum(dot(j, phi) for j in w)))


def rho_curX(phi, K):
    return -expect(phi, K, lambda w: sum(dot(j, phi) for j in w[lin_top(phi, w):]))


def d_first(s, th, K):
    def term(w):
        if sum(dot(j, th) for j in w) <= 0:
            return sum(log(1 + s * dot(j, th)) for j in w)
        return 0
    return expect(None, K, term)


def dcur_first(s, th, K):
    return expect(None, K, lambda w: sum(log(1 + s * dot(j, th)) for j in w[lin_top(th, w):]))


a = (mpf('0.1'), mpf('0.1'))
b = (mpf('0.2'), mpf('0.2'))
print('gamma(0.1,0.1)        ', gamma(a))
print('gamma(0.2,0.2)        ', gamma(b))
print('E[Z] K=5 (0.1,0.1)    ', 5 * log(gamma(a)), expect(a, 5, lambda w: log_twr(a, w)))
print('rho_down K=1 (0.1)    ', -down(a, 1))
print('rho_down K=5 (0.2)    ', -down(b, 5))
print('rho_cur  K=5 (0.2)    ', -dcur(b, 5))
print('rho_downX K=1 (0.1)   ', rho_downX(a, 1))
print('rho_downX K=5 (0.2)   ', rho_downX(b, 5))
print('rho_curX  K=5 (0.2)   ', rho_curX(b, 5))
th = (1 / sqrt(2), 1 / sqrt(2))
print('d K=3 s=.35*sqrt2     ', d_first(mpf('0.35') * sqrt(2), th, 3), down((mpf('0.35'), mpf('0.35')), 3))
print('dcur K=3 s=.35*sqrt2  ', dcur_first(mpf('0.35') * sqrt(2), th, 3), dcur((mpf('0.35'), mpf('0.35')), 3))
for K in range(1, 9):
    print('converge K=%d           ' % K, -dcur(b, K))
sm = mpf('1e-4')
print('d K=3 s=1e-4          ', d_first(sm, th, 3), down((sm * th[0], sm * th[1]), 3))
print('dcur K=3 s=1e-4       ', dcur_first(sm, th, 3), dcur((sm * th[0], sm * th[1]), 3))
print('E[U] K=2 s=1e-4       ', up((sm * th[0], sm * th[1]), 2))
