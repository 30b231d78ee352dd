import { ApiClient } from "./api";
import { Controller } from "./controller";
import { Store } from "./state";
import { renderApp } from "./views";
import "./styles.css";

export interface App {
  store: Store;
  controller: Controller;
}

export function createApp(root: HTMLElement, api: ApiClient = new ApiClient()): App {
  const store = new Store();
  const controller = new Controller(store, api);
  const sync = () => {
    root.innerHTML = "";
    root.append(renderApp(store.get(), controller));
  };
  store.subscribe(sync);
  sync();
  void controller.loadModels();
  return { store, controller };
}

const mount = document.getElementById("app");
if (mount) {
  createApp(mount);
}
