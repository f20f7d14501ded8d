/**
 * Dual-deck crossfade engine, pure and clock-driven.
 *
 * Exactly one deck sits at gain 1 when idle; during a fade the incoming
 * deck follows sin(x*pi/2) and the outgoing cos(x*pi/2), so the summed
 * power stays at 1 (equal-power). Re-transitions during a fade retarget
 * it by reversing the progress, which keeps both gains continuous - no
 * gap and no overshoot. Deck playheads wrap at their excerpt length to
 * model seamless looping.
 */

export interface Deck {
  excerpt: string | null;
  durationS: number;
  playheadS: number;
  gain: number;
}

export interface Fade {
  /** deck index fading IN */
  target: 0 | 1;
  /** 0..1 */
  progress: number;
}

export interface EngineState {
  decks: [Deck, Deck];
  fade: Fade | null;
  crossfadeMs: number;
  lastMs: number;
}

export type TransitionEffect = "noop" | "started" | "retargeted";

const HALF_PI = Math.PI / 2;

export function createEngine(crossfadeMs: number, nowMs = 0): EngineState {
  return {
    decks: [
      { excerpt: null, durationS: 0, playheadS: 0, gain: 1 },
      { excerpt: null, durationS: 0, playheadS: 0, gain: 0 },
    ],
    fade: null,
    crossfadeMs,
    lastMs: nowMs,
  };
}

function applyFadeGains(state: EngineState): void {
  const fade = state.fade;
  if (!fade) {
    return;
  }
  const x = Math.min(1, Math.max(0, fade.progress));
  state.decks[fade.target].gain = Math.sin(x * HALF_PI);
  state.decks[1 - fade.target]!.gain = Math.cos(x * HALF_PI);
}

/** Advance playheads and any running fade to wall-clock `nowMs`. */
export function advance(state: EngineState, nowMs: number): void {
  const dtMs = Math.max(0, nowMs - state.lastMs);
  state.lastMs = nowMs;
  for (const deck of state.decks) {
    if (deck.excerpt !== null && deck.durationS > 0 && deck.gain > 0) {
      deck.playheadS = (deck.playheadS + dtMs / 1000) % deck.durationS;
    }
  }
  if (state.fade) {
    state.fade.progress += state.crossfadeMs > 0 ? dtMs / state.crossfadeMs : 1;
    if (state.fade.progress >= 1) {
      // snap to the exact rest state: one deck at 1, the other at 0
      state.decks[state.fade.target].gain = 1;
      state.decks[(1 - state.fade.target) as 0 | 1].gain = 0;
      state.fade = null;
      return;
    }
    applyFadeGains(state);
  }
}

/** Deck currently carrying (or fading toward) the active excerpt. */
export function activeDeck(state: EngineState): 0 | 1 {
  if (state.fade) {
    return state.fade.target;
  }
  return state.decks[0].gain >= state.decks[1].gain ? 0 : 1;
}

export function activeExcerpt(state: EngineState): string | null {
  return state.decks[activeDeck(state)].excerpt;
}

/**
 * Ask the engine to play `excerpt`. Starts a fade from the idle deck,
 * retargets a running fade (reversing it when the excerpt is already on
 * the outgoing deck, or swapping the outgoing deck's content for a
 * brand-new target), and no-ops when the excerpt is already active.
 */
export function requestTransition(
  state: EngineState,
  excerpt: string,
  durationS: number,
): TransitionEffect {
  const current = activeDeck(state);
  if (state.decks[current].excerpt === excerpt) {
    return "noop";
  }
  if (state.fade) {
    const out = (1 - state.fade.target) as 0 | 1;
    if (state.decks[out].excerpt !== excerpt) {
      // brand-new target mid-fade: reuse the quieter (outgoing) deck
      state.decks[out].excerpt = excerpt;
      state.decks[out].durationS = durationS;
      state.decks[out].playheadS = 0;
    }
    // reverse: the outgoing deck becomes the incoming one at the gain it
    // already has (sin and cos swap roles at mirrored progress)
    state.fade = { target: out, progress: 1 - state.fade.progress };
    applyFadeGains(state);
    return "retargeted";
  }
  const idle = (1 - current) as 0 | 1;
  state.decks[idle].excerpt = excerpt;
  state.decks[idle].durationS = durationS;
  state.decks[idle].playheadS = 0;
  state.fade = { target: idle, progress: 0 };
  applyFadeGains(state);
  return "started";
}

/** Sanity accessor used by tests and the debug overlay. */
export function gains(state: EngineState): [number, number] {
  return [state.decks[0].gain, state.decks[1].gain];
}
