// Dictation sources. The app consumes partial/final events and never cares
// where they come from; live capture plugs a platform recognizer into the
// same interface, and the simulated mic makes every flow drivable in tests
// and on machines without audio.

export interface DictationEvents {
  onPartial: (text: string) => void;
  onFinal: (text: string) => void;
  onError?: (message: string) => void;
}

export interface DictationSource {
  start(events: DictationEvents): void;
  stop(): void;
}

/** Replays a known utterance as growing word-prefix partials, then the full
 * text as the final. `delayMs: 0` runs synchronously via microtasks. */
export class SimulatedMic implements DictationSource {
  private finished = false;
  private spoken = "";
  private events: DictationEvents | null = null;

  constructor(
    private readonly utterance: string,
    private readonly delayMs = 40,
  ) {}

  start(events: DictationEvents): void {
    this.finished = false;
    this.spoken = "";
    this.events = events;
    const words = this.utterance.split(/\s+/).filter(Boolean);
    const step = (i: number) => {
      if (this.finished) return;
      if (i < words.length) {
        this.spoken = words.slice(0, i + 1).join(" ");
        events.onPartial(this.spoken);
        schedule(() => step(i + 1), this.delayMs);
      } else {
        this.finished = true;
        events.onFinal(words.join(" "));
      }
    };
    schedule(() => step(0), this.delayMs);
  }

  /** Stopping mid-utterance finalizes whatever was heard so far. */
  stop(): void {
    if (this.finished || !this.events) return;
    this.finished = true;
    this.events.onFinal(this.spoken);
  }
}

function schedule(fn: () => void, delayMs: number): void {
  if (delayMs <= 0) queueMicrotask(fn);
  else setTimeout(fn, delayMs);
}

/** Adapter for streaming recognizers that post {type, text} messages, e.g.
 * over a websocket. Feed raw messages in; dictation events come out. */
export class MessageAdapter implements DictationSource {
  private events: DictationEvents | null = null;

  start(events: DictationEvents): void {
    this.events = events;
  }

  stop(): void {
    this.events = null;
  }

  push(message: { type: string; text?: string }): void {
    if (!this.events) return;
    if (message.type === "partial") this.events.onPartial(message.text ?? "");
    else if (message.type === "final") this.events.onFinal(message.text ?? "");
  }
}
