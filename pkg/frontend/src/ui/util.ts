/** Fire-and-forget for UI handlers. Mutation failures already surface as
 * store toasts; the rejection only matters to programmatic callers. */
export function fire(work: Promise<unknown>): void {
  void work.catch(() => undefined);
}
