/**
 * Debounced preview pipeline with stale-response protection.
 *
 * Control changes funnel through request(); after the debounce window the
 * newest parameters are sent with a fresh generation number. A response is
 * displayed only if it still carries the newest issued generation, so rapid
 * scrubbing can never paint an image older than the latest acknowledged
 * parameter set, regardless of network reordering.
 */
export class PreviewScheduler<P, R> {
  private generation = 0;
  private displayedGeneration = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: P | null = null;
  private inFlightCount = 0;

  constructor(
    private readonly run: (params: P) => Promise<R>,
    private readonly display: (value: R, generation: number) => void,
    private readonly onError: (err: unknown) => void = () => undefined,
    private readonly debounceMs = 150,
  ) {}

  /** Latest issued generation (for tests and progress UI). */
  get currentGeneration(): number {
    return this.generation;
  }

  get lastDisplayedGeneration(): number {
    return this.displayedGeneration;
  }

  get inFlight(): number {
    return this.inFlightCount;
  }

  request(params: P): void {
    this.pending = params;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.issue();
    }, this.debounceMs);
  }

  /** Skip the debounce window and issue the pending request immediately. */
  flush(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
      this.issue();
    }
  }

  private issue(): void {
    if (this.pending === null) return;
    const params = this.pending;
    this.pending = null;
    const gen = ++this.generation;
    this.inFlightCount += 1;
    this.run(params).then(
      (value) => {
        this.inFlightCount -= 1;
        if (gen === this.generation && gen > this.displayedGeneration) {
          this.displayedGeneration = gen;
          this.display(value, gen);
        }
      },
      (err) => {
        this.inFlightCount -= 1;
        if (gen === this.generation) this.onError(err);
      },
    );
  }
}
