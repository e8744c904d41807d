/**
 * Deterministic placeholder tiles for items without a served image: a color
 * derived from the item index plus the index as the label.
 */

export function placeholderColor(index: number): string {
  // golden-angle hue walk gives well-spread, stable colors
  const hue = (index * 137.508) % 360;
  return `hsl(${hue.toFixed(1)}, 55%, 72%)`;
}

export function makeTile(
  doc: Document,
  index: number,
  imageUrl: string | null,
): HTMLElement {
  const tile = doc.createElement("div");
  tile.className = "tile";
  tile.dataset.index = String(index);
  tile.style.backgroundColor = placeholderColor(index);
  const label = doc.createElement("span");
  label.className = "tile-label";
  label.textContent = String(index);
  tile.appendChild(label);
  if (imageUrl !== null) {
    const img = doc.createElement("img");
    img.loading = "lazy";
    img.alt = `item ${index}`;
    img.addEventListener("load", () => tile.classList.add("has-image"));
    img.addEventListener("error", () => img.remove());
    img.src = imageUrl;
    tile.appendChild(img);
  }
  return tile;
}
