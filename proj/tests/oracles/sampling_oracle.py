#!/usr/bin/env python3
"""Reference implementation of the sentence-sampling discipline.

  rng      = mt19937_64(seed)
  eligible = ascending indices of sentences with >= 1 maskable span
  k        = min(n, len(eligible))
  partial Fisher-Yates: for i in [0, k): j = i + uniform_below(len - i); swap
  result   = sorted(eligible[:k])

uniform_below(b): threshold = (2^64 - b) % b; draw x until x >= threshold;
return x % b.

Writes the 100-sentence fixture (eligibility fixed by construction) and the
golden subset for seed 0, n 10.
"""
import os

MASK64 = (1 << 64) - 1


class MT19937_64:
    NN, MM = 312, 156
    MATRIX_A = 0xB5026F5AA96619E9
    UM, LM = 0xFFFFFFFF80000000, 0x7FFFFFFF

    def __init__(self, seed):
        self.mt = [0] * self.NN
        self.mt[0] = seed & MASK64
        for i in range(1, self.NN):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK64
        self.mti = self.NN

    def next(self):
        if self.mti >= self.NN:
            for i in range(self.NN):
                x = (self.mt[i] & self.UM) | (self.mt[(i + 1) % self.NN] & self.LM)
                xa = x >> 1
                if x & 1:
                    xa ^= self.MATRIX_A
                self.mt[i] = self.mt[(i + self.MM) % self.NN] ^ xa
            self.mti = 0
        x = self.mt[self.mti]
        self.mti += 1
        x ^= (x >> 29) & 0x5555555555555555
        x ^= (x << 17) & 0x71D67FFFEDA60000
        x ^= (x << 37) & 0xFFF7EEE000000000
        x ^= x >> 43
        return x & MASK64


def uniform_below(rng, bound):
    threshold = ((1 << 64) - bound) % bound
    while True:
        x = rng.next()
        if x >= threshold:
            return x % bound


def sample(eligible, n, seed):
    rng = MT19937_64(seed)
    pool = list(eligible)
    k = min(n, len(pool))
    for i in range(k):
        j = i + uniform_below(rng, len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
    return sorted(pool[:k])


def fixture_sentences():
    out, eligible = [], []
    for i in range(100):
        if i % 3 == 1:
            out.append(f"Management reviewed segment {i % 7 + 1} results during fiscal 2024.")
        elif i % 5 == 0:
            out.append(f"Operating expenses for the region were ${i + 10}.{i % 10} million for the year.")
            eligible.append(i)
        else:
            out.append(f"Gross margin for product line {i} improved to {20 + i % 30}.{i % 9}% from the prior year.")
            eligible.append(i)
    return out, eligible


if __name__ == "__main__":
    # Reference check of the generator: first output for the default seed 5489.
    assert MT19937_64(5489).next() == 14514284786278117030
    here = os.path.dirname(os.path.abspath(__file__))
    fixtures = os.path.join(here, "..", "fixtures")
    sentences, eligible = fixture_sentences()
    with open(os.path.join(fixtures, "sampling_sentences.txt"), "w") as f:
        f.write("\n".join(sentences) + "\n")
    golden = sample(eligible, 10, 0)
    with open(os.path.join(fixtures, "sampling_golden_seed0_n10.txt"), "w") as f:
        f.write(" ".join(str(g) for g in golden) + "\n")
    print("eligible:", len(eligible))
    print("golden seed=0 n=10:", golden)
    print("golden seed=7 n=5:", sample(eligible, 5, 7))
