import { Client } from "./api.js";
import { DesignState } from "./state.js";
import { renderApp } from "./views.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "http://127.0.0.1:8080";
const state = new DesignState(new Client(base));
renderApp(document.getElementById("app")!, state);
