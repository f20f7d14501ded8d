/**
 * Web Audio binding for the crossfade engine: two looped buffer sources
 * behind two gain nodes, gains driven from the engine on an animation
 * frame clock. Decode failures surface through onAssetMissing and leave
 * playback silent instead of throwing mid-scroll.
 */

import {
  EngineState,
  advance,
  createEngine,
  requestTransition,
} from "./fade.js";

interface MountedDeck {
  source: AudioBufferSourceNode | null;
  gainNode: GainNode;
  mounted: string | null;
}

export class DualDeckPlayer {
  private ctx: AudioContext | null = null;
  private decks: MountedDeck[] = [];
  private buffers = new Map<string, AudioBuffer>();
  private pending = new Map<string, Promise<AudioBuffer | null>>();
  readonly engine: EngineState;
  private raf = 0;

  constructor(
    private bundleRoot: string,
    crossfadeMs: number,
    private onAssetMissing: (asset: string) => void,
  ) {
    this.engine = createEngine(crossfadeMs, performance.now());
  }

  private ensureContext(): AudioContext {
    if (!this.ctx) {
      this.ctx = new AudioContext();
      this.decks = [0, 1].map(() => {
        const gainNode = this.ctx!.createGain();
        gainNode.gain.value = 0;
        gainNode.connect(this.ctx!.destination);
        return { source: null, gainNode, mounted: null };
      });
      const tick = () => {
        this.tick();
        this.raf = requestAnimationFrame(tick);
      };
      this.raf = requestAnimationFrame(tick);
    }
    if (this.ctx.state === "suspended") {
      void this.ctx.resume();
    }
    return this.ctx;
  }

  async prefetch(asset: string): Promise<AudioBuffer | null> {
    if (this.buffers.has(asset)) {
      return this.buffers.get(asset)!;
    }
    if (!this.pending.has(asset)) {
      const load = (async () => {
        try {
          const ctx = this.ensureContext();
          const url = `${this.bundleRoot}/${asset}`;
          const res = await fetch(url);
          if (!res.ok) {
            throw new Error(`${res.status} for ${url}`);
          }
          const buffer = await ctx.decodeAudioData(await res.arrayBuffer());
          this.buffers.set(asset, buffer);
          return buffer;
        } catch (err) {
          console.error("asset load failed", asset, err);
          this.onAssetMissing(asset);
          return null;
        } finally {
          this.pending.delete(asset);
        }
      })();
      this.pending.set(asset, load);
    }
    return this.pending.get(asset)!;
  }

  /** Crossfade to the excerpt backing `asset` over `crossfadeMs`. */
  async transition(asset: string, crossfadeMs: number): Promise<void> {
    const buffer = await this.prefetch(asset);
    if (buffer === null) {
      return; // banner is up; stay silent rather than glitch
    }
    this.engine.crossfadeMs = crossfadeMs;
    advance(this.engine, performance.now());
    requestTransition(this.engine, asset, buffer.duration);
    this.tick();
  }

  /** Push engine state into the audio graph. */
  private tick(): void {
    if (!this.ctx) {
      return;
    }
    advance(this.engine, performance.now());
    for (let i = 0; i < 2; i += 1) {
      const engineDeck = this.engine.decks[i as 0 | 1];
      const mounted = this.decks[i]!;
      if (engineDeck.excerpt !== mounted.mounted) {
        mounted.source?.stop();
        mounted.source?.disconnect();
        mounted.source = null;
        mounted.mounted = engineDeck.excerpt;
        const buffer = engineDeck.excerpt
          ? this.buffers.get(engineDeck.excerpt)
          : undefined;
        if (buffer) {
          const source = this.ctx.createBufferSource();
          source.buffer = buffer;
          source.loop = true; // seamless restart at the excerpt boundary
          source.connect(mounted.gainNode);
          source.start();
          mounted.source = source;
        }
      }
      mounted.gainNode.gain.value = engineDeck.gain;
    }
  }

  dispose(): void {
    cancelAnimationFrame(this.raf);
    for (const deck of this.decks) {
      deck.source?.stop();
    }
    void this.ctx?.close();
  }
}
