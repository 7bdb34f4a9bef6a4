// The custom-prompt dialog behind each card's wand button: free-form
// instruction, a checkbox for sending the active keywords along as context,
// a preview of the proposed rewrite, and Accept/Cancel. Nothing is committed
// until Accept; Cancel after a preview issues no further request.

export interface MagicHandlers {
  propose: (prompt: string, includeKeywords: boolean) => Promise<string>;
  accept: () => Promise<void>;
}

export function openMagicDialog(host: HTMLElement, handlers: MagicHandlers): HTMLElement {
  const dialog = document.createElement("div");
  dialog.className = "magic-dialog";

  const prompt = document.createElement("textarea");
  prompt.className = "magic-prompt";
  prompt.placeholder = "What should happen to this ramble?";
  dialog.appendChild(prompt);

  const checkboxLabel = document.createElement("label");
  checkboxLabel.className = "magic-keywords";
  const checkbox = document.createElement("input");
  checkbox.type = "checkbox";
  checkbox.className = "magic-include-keywords";
  checkboxLabel.appendChild(checkbox);
  checkboxLabel.appendChild(document.createTextNode(" Include keywords as context"));
  dialog.appendChild(checkboxLabel);

  const preview = document.createElement("div");
  preview.className = "magic-preview";
  dialog.appendChild(preview);

  const error = document.createElement("div");
  error.className = "magic-error";
  dialog.appendChild(error);

  const buttons = document.createElement("div");
  buttons.className = "magic-buttons";

  const previewBtn = document.createElement("button");
  previewBtn.className = "magic-propose";
  previewBtn.textContent = "Preview";
  const acceptBtn = document.createElement("button");
  acceptBtn.className = "magic-accept";
  acceptBtn.textContent = "Accept";
  acceptBtn.disabled = true;
  const cancelBtn = document.createElement("button");
  cancelBtn.className = "magic-cancel";
  cancelBtn.textContent = "Cancel";

  previewBtn.addEventListener("click", () => {
    error.textContent = "";
    void handlers
      .propose(prompt.value, checkbox.checked)
      .then((candidate) => {
        preview.textContent = candidate;
        acceptBtn.disabled = false;
      })
      .catch((err: unknown) => {
        error.textContent = err instanceof Error ? err.message : String(err);
      });
  });
  acceptBtn.addEventListener("click", () => {
    void handlers
      .accept()
      .then(() => dialog.remove())
      .catch((err: unknown) => {
        error.textContent = err instanceof Error ? err.message : String(err);
      });
  });
  cancelBtn.addEventListener("click", () => dialog.remove());

  buttons.append(previewBtn, acceptBtn, cancelBtn);
  dialog.appendChild(buttons);
  host.appendChild(dialog);
  return dialog;
}
