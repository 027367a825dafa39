# SPDX-License-Identifier: Apache-2.0
"""Pre-registered Monte Carlo oracle for the one-shot merge simulator thresholds.

Independent NumPy implementation of random-unitary encoding and the decoupling
quantities. Run this before freezing any trend threshold in the test suite;
the frozen numbers come from here, never from the library under test.

Usage: python3 scripts/oracle_merge_sweep.py [--fast]
"""

import argparse
import json
import numpy as np


def haar_unitary(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def ghz_state(local_dim=2):
    psi = np.zeros(local_dim**3, dtype=complex)
    for i in range(local_dim):
        psi[i * local_dim**2 + i * local_dim + i] = 1.0
    return psi / np.linalg.norm(psi), (local_dim, local_dim, local_dim)


def random_abr_state(rng, dims=(2, 2, 2)):
    d = int(np.prod(dims))
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v), dims


def grouped_copies(psi, dims, n):
    """|psi|^{otimes n} with registers regrouped role-major: (A^n, B^n, R^n)."""
    da, db, dr = dims
    out = psi.reshape(da, db, dr)
    cur = out
    for _ in range(n - 1):
        cur = np.tensordot(cur, psi.reshape(da, db, dr), axes=0)
    # axes are (a1,b1,r1,a2,b2,r2,...): regroup
    perm = [3 * i for i in range(n)] + [3 * i + 1 for i in range(n)] + [3 * i + 2 for i in range(n)]
    cur = np.transpose(cur, perm)
    return cur.reshape(da**n, db**n, dr**n)


def encode_split(psi_n, u, k):
    """Apply u to the A block and split it into (sent=2^k, kept)."""
    da = psi_n.shape[0]
    m = u @ psi_n.reshape(da, -1)
    d_sent = 2**k
    d_kept = da // d_sent
    return m.reshape(d_sent, d_kept, psi_n.shape[1], psi_n.shape[2]), d_kept


def kept_ref_matrix(enc):
    """Matrix M with rows (A_kept, R), cols (A_sent, B); rho_{kept,R} = M M^dag."""
    d_sent, d_kept, db, dr = enc.shape
    m = np.transpose(enc, (1, 3, 0, 2)).reshape(d_kept * dr, d_sent * db)
    return m


def rho_ref(enc):
    d_sent, d_kept, db, dr = enc.shape
    m = np.transpose(enc, (3, 0, 1, 2)).reshape(dr, -1)
    return m @ m.conj().T


def uhlmann_fidelity(enc):
    """F(rho_{kept,R}, pi_kept ⊗ rho_R) via the nuclear norm of sqrt(sigma) M."""
    d_sent, d_kept, db, dr = enc.shape
    m = kept_ref_matrix(enc)
    rr = rho_ref(enc)
    w, v = np.linalg.eigh(rr)
    w = np.clip(w, 0.0, None)
    sq = (v * np.sqrt(w)) @ v.conj().T
    g = np.einsum("rs,asc->arc", sq, m.reshape(d_kept, dr, -1))
    f = np.linalg.svd(g.reshape(d_kept * dr, -1), compute_uv=False).sum() / np.sqrt(d_kept)
    return min(max(f, 0.0), 1.0)


def decoupling_error(enc):
    d_sent, d_kept, db, dr = enc.shape
    m = kept_ref_matrix(enc)
    rho = m @ m.conj().T
    sigma = np.kron(np.eye(d_kept) / d_kept, rho_ref(enc))
    ev = np.linalg.eigvalsh(rho - sigma)
    return 0.5 * np.abs(ev).sum()


def sweep(psi, dims, n, ks, trials, seed, want_decoupling=False):
    rows = {}
    psi_n = grouped_copies(psi, dims, n)
    da = dims[0] ** n
    for k in ks:
        fids, errs = [], []
        for t in range(trials):
            rng = np.random.default_rng((seed, n, k, t))
            u = haar_unitary(da, rng)
            enc, _ = encode_split(psi_n, u, k)
            fids.append(uhlmann_fidelity(enc))
            if want_decoupling:
                errs.append(decoupling_error(enc))
        entry = {
            "mean_fid": float(np.mean(fids)),
            "se_fid": float(np.std(fids, ddof=1) / np.sqrt(len(fids))) if trials > 1 else 0.0,
        }
        if want_decoupling:
            entry["mean_dec"] = float(np.mean(errs))
            entry["se_dec"] = float(np.std(errs, ddof=1) / np.sqrt(len(errs))) if trials > 1 else 0.0
        rows[k] = entry
    return rows


def encode_ancilla(psi_n, u, k):
    """Paper-literal variant: adjoin a k-qubit |0> ancilla, mix, send the ancilla."""
    da, db, dr = psi_n.shape
    d_anc = 2**k
    big = np.zeros((da * d_anc, db, dr), dtype=complex)
    big.reshape(da, d_anc, db, dr)[:, 0, :, :] = psi_n
    m = u @ big.reshape(da * d_anc, -1)
    # kept = original A factor (leading), sent = ancilla factor (trailing)
    enc = m.reshape(da, d_anc, db, dr)
    return np.transpose(enc, (1, 0, 2, 3)), da


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--fast", action="store_true", help="skip the n=8 runs")
    args = ap.parse_args()

    out = {}
    ghz, gdims = ghz_state()

    # 1. GHZ n=6 acceptance sweep: k = 1..6, 20 trials
    out["ghz_n6"] = sweep(ghz, gdims, 6, range(1, 7), 20, seed=20260810)
    means = {k: v["mean_fid"] for k, v in out["ghz_n6"].items()}
    out["ghz_n6_gap_k5_k1"] = means[5] - means[1]
    out["ghz_n6_kstar_0p9"] = next((k for k in range(1, 7) if means[k] >= 0.9), None)

    # 2. GHZ n=4 decoupling means: k=1 vs k=3, 10 trials
    dec = sweep(ghz, gdims, 4, [1, 3], 10, seed=777, want_decoupling=True)
    out["ghz_n4_decoupling"] = dec

    # 3. Rate anchoring margins at k = ceil(n/2) +/- 2
    margins = {}
    for n, trials in ((4, 20), (6, 20), (8, 6 if not args.fast else 0)):
        if trials == 0:
            continue
        k_lo, k_hi = n // 2 - 2, n // 2 + 2
        ks = [k for k in (k_lo, k_hi) if 0 <= k <= n]
        rows = sweep(ghz, gdims, n, ks, trials, seed=4242)
        margins[n] = {
            "k_lo": k_lo,
            "k_hi": k_hi,
            "f_lo": rows[k_lo]["mean_fid"],
            "f_hi": rows[k_hi]["mean_fid"],
            "margin": rows[k_hi]["mean_fid"] - rows[k_lo]["mean_fid"],
        }
    out["rate_anchor_margins"] = margins

    # 4. Monotonicity sanity on a random ABR state, n in {2,4,6}
    rng = np.random.default_rng(99)
    psi_r, rdims = random_abr_state(rng)
    mono = {}
    for n in (2, 4, 6):
        rows = sweep(psi_r, rdims, n, range(0, n + 1), 20, seed=55)
        ok = all(
            rows[k + 1]["mean_fid"]
            >= rows[k]["mean_fid"] - 2.0 * np.hypot(rows[k]["se_fid"], rows[k + 1]["se_fid"])
            for k in range(0, n)
        )
        mono[n] = {"monotone_2se": bool(ok), "means": {k: rows[k]["mean_fid"] for k in rows}}
    out["random_abr_monotone"] = mono

    # 5. Split vs ancilla encoder: GHZ n=4, matched sent dimension 2^2
    n, k, trials = 4, 2, 20
    psi_n = grouped_copies(ghz, gdims, n)
    da = 2**n
    es, ea = [], []
    for t in range(trials):
        rng = np.random.default_rng((11, t))
        es.append(decoupling_error(encode_split(psi_n, haar_unitary(da, rng), k)[0]))
        rng2 = np.random.default_rng((12, t))
        ea.append(decoupling_error(encode_ancilla(psi_n, haar_unitary(da * 2**k, rng2), k)[0]))
    out["encoder_variants_ghz_n4_k2"] = {
        "split_mean": float(np.mean(es)),
        "split_se": float(np.std(es, ddof=1) / np.sqrt(trials)),
        "ancilla_mean": float(np.mean(ea)),
        "ancilla_se": float(np.std(ea, ddof=1) / np.sqrt(trials)),
    }

    # Closed-form anchors
    out["phi_plus_k0_uhlmann"] = 0.5  # F(phi+, I/4) = sqrt(<phi|I/4|phi>)
    out["h_one_third_bits"] = float(-(1 / 3) * np.log2(1 / 3) - (2 / 3) * np.log2(2 / 3))

    print(json.dumps(out, indent=2, default=str))


if __name__ == "__main__":
    main()
