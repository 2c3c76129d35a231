import type { Decision, SubmitAck } from "./types.js";

/** Durable storage for queued decisions; swapped for memory in tests. */
export interface QueueStore {
  load(): Decision[];
  save(items: Decision[]): void;
}

export class MemoryStore implements QueueStore {
  private items: Decision[] = [];

  load(): Decision[] {
    return this.items.map((d) => ({ ...d }));
  }

  save(items: Decision[]): void {
    this.items = items.map((d) => ({ ...d }));
  }
}

/** QueueStore over window.localStorage, surviving reloads while offline. */
export class LocalStorageStore implements QueueStore {
  constructor(
    private storage: Pick<Storage, "getItem" | "setItem">,
    private key = "hhlink.pending-decisions",
  ) {}

  load(): Decision[] {
    const raw = this.storage.getItem(this.key);
    if (raw === null) {
      return [];
    }
    try {
      const parsed: unknown = JSON.parse(raw);
      return Array.isArray(parsed) ? (parsed as Decision[]) : [];
    } catch {
      return [];
    }
  }

  save(items: Decision[]): void {
    this.storage.setItem(this.key, JSON.stringify(items));
  }
}

/**
 * FIFO queue of decisions that could not be posted.
 *
 * `flush` replays in order and stops at the first failure, leaving the
 * remainder queued. Replaying an already-applied decision is safe because
 * the server acknowledges exact duplicates instead of erroring.
 */
export class OfflineQueue {
  constructor(private store: QueueStore = new MemoryStore()) {}

  get length(): number {
    return this.store.load().length;
  }

  enqueue(decision: Decision): void {
    const items = this.store.load();
    items.push(decision);
    this.store.save(items);
  }

  peekAll(): Decision[] {
    return this.store.load();
  }

  /** Post queued decisions oldest-first; returns how many were delivered. */
  async flush(post: (d: Decision) => Promise<SubmitAck>): Promise<number> {
    let delivered = 0;
    let items = this.store.load();
    while (items.length > 0) {
      const head = items[0]!;
      try {
        await post(head);
      } catch {
        this.store.save(items);
        return delivered;
      }
      delivered++;
      items = items.slice(1);
      this.store.save(items);
    }
    return delivered;
  }
}
