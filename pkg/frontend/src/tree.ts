import { asBrowseNode, BrowseNode } from './protocol.js';

export type LeafClickHandler = (path: string[], label: string) => void;

/**
 * Collapsible view of the browse payload.  Interior nodes toggle their
 * subtree; leaves expand to their ranked researcher rows and their label
 * doubles as a query link.  Malformed payloads render an error panel.
 */
export function renderTree(container: HTMLElement, payload: unknown, onLeafClick: LeafClickHandler): void {
  container.textContent = '';
  let root: BrowseNode;
  try {
    root = asBrowseNode(payload);
  } catch (error) {
    const panel = container.ownerDocument.createElement('div');
    panel.className = 'error-panel';
    panel.textContent = `Cannot display the browse tree: ${error instanceof Error ? error.message : error}`;
    container.appendChild(panel);
    return;
  }
  if (!root.label && (root.children?.length ?? 0) === 0) {
    const empty = container.ownerDocument.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = 'No researchers are placed in the browse tree yet.';
    container.appendChild(empty);
    return;
  }
  container.appendChild(buildNode(container.ownerDocument, root, [], onLeafClick));
}

function buildNode(
  doc: Document,
  node: BrowseNode,
  path: string[],
  onLeafClick: LeafClickHandler,
): HTMLElement {
  const element = doc.createElement('div');
  element.className = 'tree-node';
  const here = [...path, node.label];

  const header = doc.createElement('div');
  header.className = 'tree-header';

  if (node.researchers !== undefined) {
    element.classList.add('leaf');
    const label = doc.createElement('a');
    label.className = 'tree-label leaf-label';
    label.textContent = node.label;
    label.addEventListener('click', (event) => {
      event.preventDefault();
      onLeafClick(here, node.label);
    });
    header.appendChild(label);

    const toggle = doc.createElement('button');
    toggle.className = 'toggle';
    toggle.textContent = `${node.researchers.length}`;
    header.appendChild(toggle);
    element.appendChild(header);

    const body = doc.createElement('ol');
    body.className = 'leaf-researchers collapsed';
    for (const row of node.researchers) {
      const item = doc.createElement('li');
      item.className = 'leaf-researcher';
      item.textContent = `${row.id} ${row.score.toFixed(4)}`;
      body.appendChild(item);
    }
    toggle.addEventListener('click', () => body.classList.toggle('collapsed'));
    element.appendChild(body);
    return element;
  }

  const toggle = doc.createElement('button');
  toggle.className = 'toggle';
  toggle.textContent = '-';
  header.appendChild(toggle);

  const label = doc.createElement('span');
  label.className = 'tree-label';
  label.textContent = node.label;
  header.appendChild(label);
  element.appendChild(header);

  const body = doc.createElement('div');
  body.className = 'tree-children';
  for (const child of node.children ?? []) {
    body.appendChild(buildNode(doc, child, here, onLeafClick));
  }
  toggle.addEventListener('click', () => {
    const hidden = body.classList.toggle('collapsed');
    toggle.textContent = hidden ? '+' : '-';
  });
  element.appendChild(body);
  return element;
}
