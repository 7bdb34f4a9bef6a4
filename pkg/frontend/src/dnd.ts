// Drag state shared across cards. DataTransfer payloads are unreliable in
// non-browser DOM implementations, so the dragged id lives here and the
// drop handlers only have to decide between the two gestures: dropping in
// the gap between cards reorders, dropping onto a card's body merges.

export interface DragContext {
  rambleId: string | null;
}

export const dragContext: DragContext = { rambleId: null };

export function beginDrag(rambleId: string): void {
  dragContext.rambleId = rambleId;
}

export function endDrag(): void {
  dragContext.rambleId = null;
}

export function draggedId(): string | null {
  return dragContext.rambleId;
}
