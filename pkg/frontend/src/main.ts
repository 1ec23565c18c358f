import { AnnotatorApp } from "./app.js";

declare global {
  interface Window {
    app: AnnotatorApp;
  }
}

window.app = new AnnotatorApp(document);
