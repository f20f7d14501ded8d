"""Deterministic synthetic mini-corpus generator.

Builds a complete, self-consistent input set for the pipeline: a
3-chapter book with quote annotations, subtitles plus transcript, a
200-shot movie with 12 planted scenes, a 5-track album whose tracks
each span a major and a minor key, movie audio with album excerpts
placed under chosen scenes, embedding bundles, emotion scores, a
concreteness lexicon, and a ready-to-run config file.

Everything derives from one seed; regenerating produces identical
bytes, which the end-to-end determinism checks rely on.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from .corpus.audio import write_wav
from .corpus.embeddings import write_embeddings

SR = 11025
EMB_DIM = 24
SHOT_LEN_MS = 3000
N_SHOTS = 200
SCENE_SIZES = [18, 15, 17, 16, 17, 17, 16, 18, 16, 17, 17, 16]
TRACK_SECTION_S = 60.0

# (pitch class of tonic, mode) per 60 s section
TRACK_KEYS = {
    "t1": [(0, "major"), (9, "minor")],    # C major, A minor
    "t2": [(7, "major"), (4, "minor")],    # G major, E minor
    "t3": [(5, "major"), (2, "minor")],    # F major, D minor
    "t4": [(10, "major"), (7, "minor")],   # Bb major, G minor
    "t5": [(4, "major"), (0, "minor")],    # E major, C minor
}
TRACK_IDS = list(TRACK_KEYS)

# (track_id, offset into track, movie start, length) covering whole scenes
MUSIC_PLACEMENTS = [
    ("t1", 3.0, 0.0, 54.0),       # scene 1
    ("t2", 62.0, 99.0, 51.0),     # scene 3
    ("t3", 4.0, 198.0, 51.0),     # scene 5
    ("t4", 63.0, 348.0, 54.0),    # scene 8
    ("t5", 6.0, 402.0, 48.0),     # scene 9
    ("t1", 64.0, 501.0, 51.0),    # scene 11
]

# sentence spec: (text, speaker or None, planted scene or None)
_CH1 = (
    "CHAPTER I. The River Crossing",
    [
        [("Alice led the march down to the water before first light.", None, None),
         ('"We must cross the river tonight," said Alice.', "Alice", None)],
        [("The grey stone bridge arched over the river beside a ruined tower.", None, 1),
         ("Lantern smoke drifted across the wet planks of the old boat.", None, 1)],
        [('"The rope will hold if the current stays low," said Dane.', "Dane", None),
         ("Hope kept them moving while doubt trailed behind.", None, None)],
        [("Rain beat the camp and worry settled over the company.", None, None),
         ('"We lost the wagon in the mud," said Dane.', "Dane", None)],
        [("A broken cart lay in the mud beside the drowned fire pit.", None, 3),
         ("Smoke hung low over the soaked canvas and cold iron pots.", None, 3)],
        [("Fear of the dark water kept sleep away.", None, None),
         ("Their luck had thinned with the daylight.", None, None)],
        [("Talk turned to the ledger and the long tally of supplies.", None, None),
         ('"The count can wait for morning," said Alice.', "Alice", None)],
        [("Plans were weighed, amended, and weighed again.", None, None),
         ("Patience was the only coin they could still spend.", None, None)],
        [("The evening passed in quiet bargaining over duty and rest.", None, None)],
    ],
)

_CH2 = (
    "CHAPTER II. The Mountain Market",
    [
        [("The road climbed into pine forest and bright snow.", None, None),
         ('"The market opens at the north gate," said Bob.', "Bob", None)],
        [("Market stalls of red canvas lined the castle wall by the gate.", None, 5),
         ("Barrels of apples and fresh bread crowded every wagon.", None, 5)],
        [('"Keep the horses near the stable," said Elle.', "Elle", None),
         ("Good humor ran through the company like warm cider.", None, None)],
        [("Word of the toll reached them before the summit.", None, None),
         ('"They doubled the toll at the pass," said Elle.', "Elle", None)],
        [("Iron chains barred the mountain gate under a grey cliff.", None, 8),
         ("Torch smoke stained the snow beneath the watch tower.", None, 8)],
        [("Sorrow and anger argued in every tent.", None, None),
         ("The promise of the far coast felt thin and distant.", None, None)],
        [("Bob walked the picket line counting ropes and pegs.", None, None),
         ('"Nothing moves until the ice melts," said Bob.', "Bob", None)],
        [("A crow watched the camp from the bell tower by the frozen well.", None, 6)],
        [("The rest of the day went to mending saddles and boots.", None, None)],
    ],
)

_CH3 = (
    "CHAPTER III. The Harbor Bells",
    [
        [("The company came down to the harbor with the tide.", None, None),
         ('"The ship waits beyond the sea wall," said Cora.', "Cora", None)],
        [("White sails and tall masts crowded the stone quay.", None, 9),
         ("Gulls circled the anchor chains in the morning sun.", None, 9)],
        [('"Load the grain before the rain returns," said Finn.', "Finn", None),
         ("Wonder at the open water lifted every spirit.", None, None)],
        [("The harbormaster kept them waiting past noon.", None, None),
         ('"The berth fee rose again," said Finn.', "Finn", None)],
        [("Rumor of pirates soured the evening meal.", None, None),
         ("Doubt crept back into their talk.", None, None)],
        [("A cold fog shut the harbor mouth by night.", None, None)],
        [('"We sail on the morning bell," said Cora.', "Cora", None),
         ("The watch rotated while the city slept.", None, None)],
        [("Lamplight glowed on the wet deck boards and coiled rope.", None, 11)],
        [("The night passed with slow bells and calm water.", None, None)],
    ],
)

CHAPTERS = [_CH1, _CH2, _CH3]

# paragraph emotion per chapter: three paragraphs each of pos, neg, neutral
_EMOTION_ROWS = {"positive": (0.8, 0.1, 0.1), "negative": (0.1, 0.1, 0.8),
                 "neutral": (0.1, 0.8, 0.1)}
_BLOCK_EMOTION = ["positive", "negative", "neutral"]

# scene -> [(offset into scene seconds, SPEAKER, text)]
SCENE_CUES: dict[int, list[tuple[float, str, str]]] = {
    1: [(8, "ALICE", "We must cross the river tonight"),
        (20, "DANE", "The boats are ready at the bank"),
        (34, "ALICE", "Keep the lanterns low")],
    2: [(6, "DANE", "The current is faster than it looks"),
        (18, "ALICE", "Hold the rope line steady"),
        (30, "DANE", "Mind the loose plank")],
    3: [(10, "ALICE", "The wagon is gone"),
        (22, "DANE", "We saved what we could"),
        (36, "ALICE", "No fires tonight")],
    4: [(8, "DANE", "The road bends east past the mill"),
        (20, "ALICE", "We walk until dusk"),
        (32, "GUARD", "State your business on this road")],
    5: [(7, "BOB", "The market opens at the north gate"),
        (19, "ELLE", "Count the coin twice"),
        (33, "BOB", "Stay close to the stalls")],
    6: [(9, "ELLE", "The well is frozen solid"),
        (21, "BOB", "Watch that crow it follows us"),
        (35, "ELLE", "The ice will not break before spring")],
    7: [(8, "BOB", "The pass is clear by the old fort"),
        (20, "ELLE", "Send word ahead to the inn"),
        (31, "BOB", "We camp below the ridge")],
    8: [(9, "ELLE", "They doubled the toll at the pass"),
        (23, "BOB", "We pay or we turn around"),
        (37, "ELLE", "Keep the purse hidden")],
    9: [(7, "CORA", "The ship waits beyond the sea wall"),
        (19, "FINN", "The tide turns at noon"),
        (31, "CORA", "Mind the gull nests on the quay")],
    10: [(10, "CORA", "Stack the crates along the pier"),
         (22, "FINN", "The harbor fee is paid in silver"),
         (36, "CORA", "No lights after the last bell")],
    11: [(8, "CORA", "We sail on the morning bell"),
         (20, "FINN", "The wind holds from the west"),
         (33, "CORA", "Stow the rope before you sleep")],
    12: [(9, "FINN", "Cast off the stern line"),
         (21, "CORA", "Take us out slow"),
         (33, "FINN", "The open sea at last")],
}

# transcript-only lines inserted after these scenes' cues
EXTRA_TRANSCRIPT = {4: ("GUARD", "Papers and names for the ledger"),
                    10: ("HARBORMASTER", "All berths are taken till dawn")}

CONCRETE_WORDS = """
river bridge stone tower boat lantern rope cliff castle gate sword shield
horse horses saddle saddles forest pine snow mountain fire smoke market
stall stalls barrel barrels wagon cloak candle door wall rain mud path
field crow bell bells chain chains anchor sail sails mast masts oar torch
helmet banner bread apple apples well roof stable cart iron oak plank
planks canvas pot pots tent quay gull gulls deck board boards lamplight
water ice coin purse grain ship sea harbor pier crate crates boot boots
peg pegs lines ledger
""".split()

STOPWORDS = """
the a an and or but of to in on at by with from into over under we i you
he she it they them his her their our was were is are be been had has
have said did do does will would must can could may might not no this
that these those there here then than as for so up down out off again
once away back before after while until every like
""".split()


def _scene_bounds_ms() -> list[tuple[int, int]]:
    bounds = []
    shot = 0
    for size in SCENE_SIZES:
        start = shot * SHOT_LEN_MS
        shot += size
        bounds.append((start, shot * SHOT_LEN_MS))
    return bounds


def _synth_notes(
    rng: np.random.Generator, tonic: int, mode: str, duration_s: float
) -> np.ndarray:
    """Seeded note cloud in one key: tonic-heavy scale degrees, harmonic
    partials, exponential decay. Rich enough for both keystrength and
    constellation hashing."""
    if mode == "major":
        degrees = [0, 2, 4, 5, 7, 9, 11]
        weights = [4, 1, 3, 1, 3, 1, 1]
    else:
        degrees = [0, 2, 3, 5, 7, 8, 11]   # harmonic minor color
        weights = [4, 1, 3, 1, 3, 1, 1]
    probs = np.array(weights, dtype=float)
    probs /= probs.sum()

    n = int(duration_s * SR)
    out = np.zeros(n)
    t = 0.0
    c0 = 440.0 * 2.0 ** (-57.0 / 12.0)
    # recordings are never perfectly equal-tempered: a per-section tuning
    # offset plus per-note jitter keeps spectral peaks from colliding
    # across unrelated tracks (well under the half-semitone rounding of
    # the chroma mapping)
    tuning = float(rng.uniform(-0.3, 0.3))
    while t < duration_s - 0.3:
        degree = int(rng.choice(len(degrees), p=probs))
        pc = (tonic + degrees[degree]) % 12
        octave = int(rng.integers(3, 6))
        detune = tuning + float(rng.uniform(-0.05, 0.05))
        freq = c0 * 2.0 ** (octave + (pc + detune) / 12.0)
        length = float(rng.uniform(0.25, 0.9))
        amp = float(rng.uniform(0.10, 0.30))
        i0 = int(t * SR)
        i1 = min(n, i0 + int(length * SR))
        tt = np.arange(i1 - i0) / SR
        env = np.minimum(tt / 0.01, 1.0) * np.exp(-3.0 * tt)
        tone = (
            np.sin(2 * np.pi * freq * tt)
            + 0.5 * np.sin(2 * np.pi * 2 * freq * tt)
            + 0.25 * np.sin(2 * np.pi * 3 * freq * tt)
        )
        out[i0:i1] += amp * env * tone
        t += float(rng.uniform(0.12, 0.45))
    peak = np.abs(out).max()
    if peak > 0:
        out *= 0.5 / peak
    return out


def synth_track(rng: np.random.Generator, track_id: str) -> np.ndarray:
    parts = [
        _synth_notes(rng, tonic, mode, TRACK_SECTION_S)
        for tonic, mode in TRACK_KEYS[track_id]
    ]
    return np.concatenate(parts)


def _dialogue_noise(rng: np.random.Generator, duration_s: float) -> np.ndarray:
    """Speech-like noise bursts: no stable spectral peaks to fingerprint."""
    n = int(duration_s * SR)
    out = np.zeros(n)
    t = 0.0
    while t < duration_s - 0.5:
        burst = float(rng.uniform(0.15, 0.40))
        i0 = int(t * SR)
        i1 = min(n, i0 + int(burst * SR))
        chunk = rng.normal(0.0, 1.0, i1 - i0)
        # crude low-pass: two-sample moving average, voice-band-ish
        chunk = np.convolve(chunk, np.ones(8) / 8.0, mode="same")
        env = np.sin(np.linspace(0, np.pi, i1 - i0)) ** 2
        out[i0:i1] += 0.12 * env * chunk
        t += burst + float(rng.uniform(0.10, 0.50))
    return out


def _orthonormal_basis(rng: np.random.Generator) -> np.ndarray:
    m = rng.normal(size=(EMB_DIM, EMB_DIM))
    q, _ = np.linalg.qr(m)
    return q


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate(dest: str | Path, seed: int = 7) -> Path:
    """Write the whole mini-corpus under `dest`; returns the config path."""
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "embeddings").mkdir(exist_ok=True)
    (dest / "album").mkdir(exist_ok=True)
    rng = np.random.default_rng(seed)

    basis = _orthonormal_basis(rng)
    scene_dirs = {q: basis[:, q - 1] for q in range(1, 13)}
    block_dirs = {
        (ch, blk): basis[:, 12 + 3 * (ch - 1) + blk]
        for ch in (1, 2, 3)
        for blk in (0, 1, 2)
    }
    filler_span = basis[:, 21:24]

    def filler_vec() -> np.ndarray:
        return _unit(filler_span @ rng.normal(size=3))

    # --- book text, quotes, emotion rows -----------------------------------
    book_lines: list[str] = []
    quote_rows: list[str] = []
    emotion_rows: list[str] = []
    sent_ids: list[str] = []
    sent_vecs: list[np.ndarray] = []
    par_ids: list[str] = []
    par_vecs: list[np.ndarray] = []

    for ci, (title, paragraphs) in enumerate(CHAPTERS, start=1):
        book_lines.append(title)
        book_lines.append("")
        for pi, sentences in enumerate(paragraphs, start=1):
            block = (pi - 1) // 3
            par_ids.append(f"ch:{ci}:par:{pi}")
            par_vecs.append(
                _unit(block_dirs[(ci, block)] + 0.05 * rng.normal(size=EMB_DIM))
            )
            emotion = _EMOTION_ROWS[_BLOCK_EMOTION[block]]
            emotion_rows.append(
                f"{ci}\t{pi}\t{emotion[0]:.3f}\t{emotion[1]:.3f}\t{emotion[2]:.3f}"
            )
            texts = []
            for si, (text, speaker, scene) in enumerate(sentences, start=1):
                texts.append(text)
                sent_ids.append(f"ch:{ci}:par:{pi}:sent:{si}")
                if scene is not None:
                    sent_vecs.append(
                        _unit(scene_dirs[scene] + 0.05 * rng.normal(size=EMB_DIM))
                    )
                else:
                    sent_vecs.append(filler_vec())
                if speaker:
                    quote_rows.append(f"{ci}\t{pi}\t{si}\t{speaker}")
            book_lines.append(" ".join(texts))
            book_lines.append("")

    (dest / "book.txt").write_text("\n".join(book_lines), encoding="utf-8")
    (dest / "quotes.tsv").write_text("\n".join(quote_rows) + "\n", encoding="utf-8")
    (dest / "emotion.tsv").write_text("\n".join(emotion_rows) + "\n", encoding="utf-8")

    # --- lexicon and stopwords ----------------------------------------------
    concrete = set(CONCRETE_WORDS)
    vocabulary: set[str] = set()
    for _, paragraphs in CHAPTERS:
        for sentences in paragraphs:
            for text, _, _ in sentences:
                vocabulary.update(
                    w.strip('",.').lower() for w in text.split() if w.strip('",.')
                )
    lexicon_lines = [
        f"{w}\t{4.5 if w in concrete else 2.0}" for w in sorted(vocabulary)
    ]
    (dest / "lexicon.tsv").write_text("\n".join(lexicon_lines) + "\n", encoding="utf-8")
    (dest / "stopwords.txt").write_text(
        "\n".join(STOPWORDS) + "\n", encoding="utf-8"
    )

    # --- shots and frame embeddings -----------------------------------------
    bounds = _scene_bounds_ms()
    shot_rows = []
    frame_ids: list[str] = []
    frame_vecs: list[np.ndarray] = []
    shot_id = 0
    for scene_idx, size in enumerate(SCENE_SIZES, start=1):
        for _ in range(size):
            shot_id += 1
            start = (shot_id - 1) * SHOT_LEN_MS
            shot_rows.append(f"{shot_id}\t{start}\t{start + SHOT_LEN_MS}")
            for frame_n in (1, 2):
                frame_ids.append(f"shot:{shot_id}:frame:{frame_n}")
                frame_vecs.append(
                    _unit(scene_dirs[scene_idx] + 0.05 * rng.normal(size=EMB_DIM))
                )
    (dest / "shots.tsv").write_text("\n".join(shot_rows) + "\n", encoding="utf-8")

    write_embeddings(
        dest / "embeddings/paragraphs.manifest.json",
        dest / "embeddings/paragraphs.f32",
        par_ids, np.stack(par_vecs),
    )
    write_embeddings(
        dest / "embeddings/sentences.manifest.json",
        dest / "embeddings/sentences.f32",
        sent_ids, np.stack(sent_vecs),
    )
    write_embeddings(
        dest / "embeddings/frames.manifest.json",
        dest / "embeddings/frames.f32",
        frame_ids, np.stack(frame_vecs),
    )

    # --- subtitles and transcript -------------------------------------------
    def srt_time(ms: int) -> str:
        h, rem = divmod(ms, 3_600_000)
        m, rem = divmod(rem, 60_000)
        s, ms = divmod(rem, 1000)
        return f"{h:02d}:{m:02d}:{s:02d},{ms:03d}"

    srt_blocks = []
    transcript_lines = []
    counter = 0
    for scene_idx in range(1, 13):
        scene_start = bounds[scene_idx - 1][0]
        for offset_s, speaker, text in SCENE_CUES[scene_idx]:
            counter += 1
            start = scene_start + int(offset_s * 1000)
            end = start + 2500
            srt_blocks.append(
                f"{counter}\n{srt_time(start)} --> {srt_time(end)}\n{text}\n"
            )
            transcript_lines.append(f"{speaker}: {text}")
        if scene_idx in EXTRA_TRANSCRIPT:
            speaker, text = EXTRA_TRANSCRIPT[scene_idx]
            transcript_lines.append(f"{speaker}: {text}")
    (dest / "subs.srt").write_text("\n".join(srt_blocks), encoding="utf-8")
    (dest / "transcript.txt").write_text(
        "\n".join(transcript_lines) + "\n", encoding="utf-8"
    )

    # --- album audio ----------------------------------------------------------
    album_rows = []
    track_audio: dict[str, np.ndarray] = {}
    for track_id in TRACK_IDS:
        audio = synth_track(rng, track_id)
        track_audio[track_id] = audio
        write_wav(dest / f"album/{track_id}.wav", audio, SR)
        album_rows.append(f"{track_id}\t{track_id}.wav\tStudy {track_id.upper()}")
    (dest / "album/index.tsv").write_text(
        "\n".join(album_rows) + "\n", encoding="utf-8"
    )

    # --- movie audio -----------------------------------------------------------
    movie_s = N_SHOTS * SHOT_LEN_MS / 1000.0
    movie = rng.normal(0.0, 0.002, int(movie_s * SR))
    movie += _dialogue_noise(rng, movie_s)
    for track_id, offset_s, start_s, length_s in MUSIC_PLACEMENTS:
        src = track_audio[track_id]
        lo = int(offset_s * SR)
        hi = lo + int(length_s * SR)
        at = int(start_s * SR)
        excerpt = src[lo:hi]
        movie[at : at + len(excerpt)] += 0.7 * excerpt
    write_wav(dest / "movie.wav", movie, SR)

    # --- config -----------------------------------------------------------------
    config = """\
# synthetic mini-corpus
paths.book = book.txt
paths.quotes = quotes.tsv
paths.subtitles = subs.srt
paths.transcript = transcript.txt
paths.shots = shots.tsv
paths.embeddings = embeddings
paths.emotion = emotion.tsv
paths.lexicon = lexicon.tsv
paths.album_index = album/index.tsv
paths.movie_audio = movie.wav
paths.stopwords = stopwords.txt
book.id = minicorpus
textseg.partition_level = 1
musicseg.kernel = 32
scenes.q = 12
refine.theta = 0.6
refine.top_k = 5
weave.seed = 20406
"""
    (dest / "config.txt").write_text(config, encoding="utf-8")
    manifest = {
        "seed": seed,
        "chapters": len(CHAPTERS),
        "tracks": TRACK_IDS,
        "scenes": len(SCENE_SIZES),
        "shots": N_SHOTS,
    }
    (dest / "minicorpus.json").write_text(
        json.dumps(manifest, indent=1) + "\n", encoding="utf-8"
    )
    return dest / "config.txt"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="generate the synthetic mini-corpus")
    parser.add_argument("dest", help="output directory")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    config = generate(args.dest, args.seed)
    print(config)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
